#pragma once

#include <stacklq/closedloop.hpp>
#include <stacklq/montecarlo.hpp>
#include <stacklq/oracle.hpp>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace stacklq::csv {

/// 17 significant digits, enough to round-trip any double.
std::string num(double v);

/// t,row,col,value for every node.
void write_trajectory(std::ostream& os, const MatrixTrajectory& traj);

/// t,player,block,row,col,value with block in {K, Khat, Kcheck, k}.
void write_gains(std::ostream& os, const FeedbackLaw& law);

/// path_id,t,block,component,value with blocks X, Xhat, Xcheck, x, v1, v2, v3.
/// Only every `thin`-th node is written (the last node always is).
void write_paths(std::ostream& os, const PathBundle& bundle, std::size_t thin = 1);

/// player,mean,stderr,n_paths,seed,grid_steps
void write_costs(std::ostream& os, const std::vector<CostEstimate>& costs);

/// player,direction_id,epsilon,mean,stderr,n_paths,seed
void write_perturbations(std::ostream& os, const std::vector<PerturbationReport>& reports);

/// outer,time,sigma_field,component,filter_value,oracle_mean,oracle_stderr.
/// sigma_field is G1 for E[Xhat | G1], G1-X for E[X | G1] and G2 for E[X | G2].
void write_oracle(std::ostream& os, const OracleReport& report);

/// h,gap_S0,gap_value
void write_dp(std::ostream& os, const std::vector<DpCrosscheck>& rows);

/// Writes `fill(stream)` to `path`, throwing std::runtime_error on I/O failure.
void to_file(const std::string& path, const std::function<void(std::ostream&)>& fill);

}  // namespace stacklq::csv
