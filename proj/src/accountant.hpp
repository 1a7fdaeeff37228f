// Copyright 2026 The sadp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SADP_ACCOUNTANT_HPP
#define SADP_ACCOUNTANT_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace sadp {

// Renyi-DP loss of one Gaussian-mechanism release at order alpha for a
// query with sensitivity equal to the noise unit: alpha / (2 sigma^2)
// (Mironov 2017, Proposition 7). sigma == 0 returns +infinity (the
// no-noise sentinel). Requires alpha > 1.
double step_rdp(double sigma, double alpha);

// Subsampled-Gaussian RDP upper bound at integer order alpha for Poisson
// sample rate q, computed via the binomial expansion of Wang, Balle &
// Kasiviswanathan (2019) evaluated in log space. Tighter than step_rdp for
// small q; requires an integer alpha >= 2.
double step_rdp_subsampled(double sigma, double alpha, double q);

// Running record of per-step RDP increments across a set of orders, with
// conversion to (epsilon, delta).
//
// Heterogeneous per-token noise within a step is charged at the smallest
// nonzero sigma used in that step (smallest noise = largest loss), which
// never under-reports. A step recorded with no noise at all marks the run
// non-private.
class PrivacyLedger {
 public:
  struct Step {
    std::uint64_t index = 0;
    double sigma = 0.0;  // charged sigma (0 when the step used no noise)
    double q = 0.0;
  };

  struct Conversion {
    double epsilon = 0.0;        // min over orders of total(a) + log(1/delta)/(a-1)
    double argmin_order = 0.0;
    double epsilon_at_32 = 0.0;  // fixed-order value kept for comparisons
    double delta = 0.0;
    bool non_private = false;
    std::string note;
  };

  // Orders must all exceed 1; order 32 is always tracked in addition to the
  // supplied grid. An empty grid selects the default {2, ..., 64}.
  explicit PrivacyLedger(std::vector<double> orders = {}, double delta = 1e-5,
                         bool amplify_subsampling = false);

  static std::vector<double> default_orders();

  // Adds one step charged at the minimum nonzero sigma among `sigma_tiers`.
  // Zero entries are ignored; an empty (or all-zero) tier set records the
  // step as non-private.
  void record_step(const std::vector<double>& sigma_tiers, double q);

  // Requires at least one recorded step.
  Conversion convert() const;

  const std::vector<double>& orders() const { return orders_; }
  const std::vector<double>& totals() const { return totals_; }
  const std::vector<Step>& steps() const { return steps_; }
  double delta() const { return delta_; }
  bool amplify_subsampling() const { return amplify_; }
  std::uint64_t non_private_steps() const { return non_private_steps_; }

  std::string to_json() const;
  static PrivacyLedger from_json(const std::string& json_text);
  static PrivacyLedger load(const std::string& path);

 private:
  std::vector<double> orders_;
  std::vector<double> totals_;  // cumulative epsilon_RDP per order
  std::vector<Step> steps_;
  double delta_;
  bool amplify_;
  std::uint64_t non_private_steps_ = 0;
};

}  // namespace sadp

#endif  // SADP_ACCOUNTANT_HPP
