#include "acerac/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace acerac {

bool adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& direction, AdamState& st,
               StepSense sense) {
  if (params.size() != direction.size() || params.size() != st.m.size()) {
    throw std::invalid_argument("adam_step: parameter, direction and moment sizes differ");
  }
  if (!direction.allFinite()) {
    ++st.skipped;
    return false;
  }
  const double sign = sense == StepSense::Ascend ? 1.0 : -1.0;
  ++st.t;
  const auto& c = st.cfg;
  st.m = c.beta1 * st.m + (1.0 - c.beta1) * direction;
  st.v = c.beta2 * st.v + (1.0 - c.beta2) * direction.cwiseAbs2();
  const double corr1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.t));
  const double corr2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.t));
  params.array() += sign * c.step_size * (st.m.array() / corr1) /
                    ((st.v.array() / corr2).sqrt() + c.epsilon);
  return true;
}

}  // namespace acerac
