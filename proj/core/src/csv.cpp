#include <stacklq/csv.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace stacklq::csv {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory(std::ostream& os, const MatrixTrajectory& traj) {
  os << "t,row,col,value\n";
  const TimeGrid& g = traj.grid();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Mat& m = traj.value(k);
    const std::string t = num(g.node(k));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        os << t << ',' << r << ',' << c << ',' << num(m(r, c)) << '\n';
      }
    }
  }
}

namespace {

void write_block(std::ostream& os, const std::string& prefix, const char* name, const Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      os << prefix << name << ',' << r << ',' << c << ',' << num(m(r, c)) << '\n';
    }
  }
}

}  // namespace

void write_gains(std::ostream& os, const FeedbackLaw& law) {
  os << "t,player,block,row,col,value\n";
  const TimeGrid& g = law.grid();
  for (std::size_t k = 0; k < g.nodes().size(); ++k) {
    for (int p = 1; p <= 3; ++p) {
      const ControlGain& gain = law.node_gain(p, k);
      const std::string prefix = num(g.node(k)) + ',' + std::to_string(p) + ',';
      write_block(os, prefix, "K", gain.K);
      write_block(os, prefix, "Khat", gain.Khat);
      write_block(os, prefix, "Kcheck", gain.Kcheck);
      write_block(os, prefix, "k", gain.k);
    }
  }
}

void write_paths(std::ostream& os, const PathBundle& bundle, std::size_t thin) {
  if (thin == 0) thin = 1;
  os << "path_id,t,block,component,value\n";
  const std::size_t N = bundle.grid.steps();
  for (std::size_t p = 0; p < bundle.paths.size(); ++p) {
    const PathRecord& r = bundle.paths[p];
    const std::string id = std::to_string(bundle.first_path + p) + ',';
    const std::pair<const char*, const Mat*> blocks[] = {
        {"X", &r.Z.X}, {"Xhat", &r.Z.Xh}, {"Xcheck", &r.Z.Xc}, {"x", &r.x},
        {"v1", &r.v[0]}, {"v2", &r.v[1]}, {"v3", &r.v[2]},
    };
    for (std::size_t k = 0; k <= N; ++k) {
      if (k % thin != 0 && k != N) continue;
      const std::string prefix = id + num(bundle.grid.node(k)) + ',';
      const Eigen::Index c = static_cast<Eigen::Index>(k);
      for (const auto& [name, m] : blocks) {
        for (Eigen::Index i = 0; i < m->rows(); ++i) {
          os << prefix << name << ',' << i << ',' << num((*m)(i, c)) << '\n';
        }
      }
    }
  }
}

void write_costs(std::ostream& os, const std::vector<CostEstimate>& costs) {
  os << "player,mean,stderr,n_paths,seed,grid_steps\n";
  for (const CostEstimate& c : costs) {
    os << c.player << ',' << num(c.mean) << ',' << num(c.std_error) << ',' << c.n_paths << ','
       << c.seed << ',' << c.grid_steps << '\n';
  }
}

void write_perturbations(std::ostream& os, const std::vector<PerturbationReport>& reports) {
  os << "player,direction_id,epsilon,mean,stderr,n_paths,seed\n";
  for (const PerturbationReport& r : reports) {
    for (std::size_t e = 0; e < r.epsilons.size(); ++e) {
      const CostEstimate& c = r.costs[e];
      os << r.player << ',' << r.direction_id << ',' << num(r.epsilons[e]) << ',' << num(c.mean)
         << ',' << num(c.std_error) << ',' << c.n_paths << ',' << c.seed << '\n';
    }
  }
}

void write_oracle(std::ostream& os, const OracleReport& report) {
  os << "outer,time,sigma_field,component,filter_value,oracle_mean,oracle_stderr\n";
  const bool g1 = report.field == SigmaField::G1;
  for (const OracleSample& s : report.samples) {
    const std::string prefix = std::to_string(s.outer) + ',' + num(s.t) + ',';
    auto rows = [&](const char* field, const Vec& mean, const Vec& se) {
      for (Eigen::Index i = 0; i < s.filter.size(); ++i) {
        os << prefix << field << ',' << i << ',' << num(s.filter[i]) << ',' << num(mean[i]) << ','
           << num(se[i]) << '\n';
      }
    };
    if (g1) {
      rows("G1", s.mean_Xh, s.stderr_Xh);
      rows("G1-X", s.mean_X, s.stderr_X);
    } else {
      rows("G2", s.mean_X, s.stderr_X);
    }
  }
}

void write_dp(std::ostream& os, const std::vector<DpCrosscheck>& rows) {
  os << "h,gap_S0,gap_value\n";
  for (const DpCrosscheck& r : rows) {
    os << num(r.h) << ',' << num(r.gap_S0) << ',' << num(r.gap_value) << '\n';
  }
}

void to_file(const std::string& path, const std::function<void(std::ostream&)>& fill) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  fill(os);
  os.flush();
  if (!os) throw std::runtime_error("write to " + path + " failed");
}

}  // namespace stacklq::csv
