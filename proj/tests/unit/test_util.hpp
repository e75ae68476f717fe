#pragma once

#include <stacklq/model.hpp>

#include <string>

namespace stacklq::test {

inline std::string data_path(const std::string& name) {
  return std::string(STACKLQ_TEST_DATA) + "/" + name;
}

inline GameSpec load(const std::string& name) { return load_spec(data_path(name)); }

inline TimeFunction scalar(double v) { return TimeFunction::constant(Mat::Constant(1, 1, v)); }

inline GameSpec with_steps(GameSpec s, std::size_t steps) {
  s.grid = TimeGrid::uniform(s.grid.horizon(), steps);
  return s;
}

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace stacklq::test
