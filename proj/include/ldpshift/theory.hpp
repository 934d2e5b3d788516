// Copyright 2026 The ldpshift Authors
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

#ifndef LDPSHIFT_THEORY_HPP_
#define LDPSHIFT_THEORY_HPP_

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ldpshift/core.hpp"
#include "ldpshift/oracles.hpp"

namespace ldpshift {

/// Expected change of the raw (pre-consistency) local-hashing estimate when a
/// fraction beta of users is replaced by attackers targeting bin m_o.
struct TheoryInput {
  std::vector<double> f;  // true frequencies of the honest users, m_o entries
  double beta = 0.05;
  double epsilon = 1.0;
  int g = 2;
  Setting setting = Setting::kUser;

  void validate() const {
    if (f.size() < 2) throw std::invalid_argument("theory: need at least 2 bins");
    if (g < 2) throw std::invalid_argument("theory: g must be >= 2");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("theory: beta outside [0, 1]");
    PrivacyBudget{epsilon};
  }
};

enum class TheoryForm {
  // Randomized-response style closed form with q = 1/(e^eps + g - 1):
  // User off-target -beta f_i - beta q/(p - q); target
  // beta/(p - q) - beta f_m - beta/((p - q) g); Server off-target -beta f_i.
  kGeneral,
  // As kGeneral with the User off-target term written -beta f_i - beta/(g - 2).
  kShort,
  // Matches the OLH estimator, whose collision rate is 1/g. Fake support
  // profile: User, the ideal report supporting only m_o; Server, m_o plus a
  // 1/g chance for every other bin.
  kEstimator,
};

inline double expected_freq_change(int i, const TheoryInput& in,
                                   TheoryForm form = TheoryForm::kGeneral) {
  in.validate();
  const int m = static_cast<int>(in.f.size());
  if (i < 1 || i > m) throw std::invalid_argument("theory: bin index out of range");
  const double e = std::exp(in.epsilon);
  const double g = in.g;
  const double p = e / (e + g - 1.0);
  const double q = 1.0 / (e + g - 1.0);
  const double b = in.beta;
  const double fi = in.f[i - 1];
  const bool target = i == m;

  if (form == TheoryForm::kEstimator) {
    const double d = p - 1.0 / g;
    double support;
    if (target) {
      support = 1.0;
    } else {
      support = in.setting == Setting::kServer ? 1.0 / g : 0.0;
    }
    return -b * fi + b * (support - 1.0 / g) / d;
  }
  if (target) return b / (p - q) - b * fi - b / ((p - q) * g);
  if (in.setting == Setting::kServer) return -b * fi;
  if (form == TheoryForm::kShort) {
    if (in.g == 2) throw std::domain_error("theory: short form is singular at g = 2");
    return -b * fi - b / (g - 2.0);
  }
  return -b * fi - b * q / (p - q);
}

/// -sum_{v=1}^{m} sum_{i<=v} E(delta f_i).
inline double expected_asg(const TheoryInput& in, TheoryForm form = TheoryForm::kGeneral) {
  in.validate();
  const int m = static_cast<int>(in.f.size());
  double partial = 0.0, total = 0.0;
  for (int v = 1; v <= m; ++v) {
    partial += expected_freq_change(v, in, form);
    total += partial;
  }
  return -total;
}

/// HST behaves as local hashing with g = 2.
inline double expected_asg_hst(TheoryInput in, TheoryForm form = TheoryForm::kGeneral) {
  in.g = 2;
  return expected_asg(in, form);
}

}  // namespace ldpshift

#endif  // LDPSHIFT_THEORY_HPP_
