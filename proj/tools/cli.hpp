/*
 * Copyright 2026 The menkf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "menkf/experiment.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace menkf::cli {

enum ExitCode : int {
  kSuccess = 0,
  kCheckFailed = 1,
  kBadArguments = 2,
  kNumericalFailure = 3,
};

/// Thrown for malformed config files or option values; maps to kBadArguments.
class BadArguments : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Ensemble size used by the sweep subcommands unless overridden. Sweeps
/// reach m well above N, where ensemble fits are linear in m; at N = 400 the
/// local LETKF problems stay m-sized and dominate the run time.
inline constexpr Index kSweepEnsembleSize = 40;

inline constexpr std::string_view kSeedEnvVar = "MATHERON_ENKF_SEED";

inline constexpr std::string_view kPosteriorHeader =
    "method,grid_index,position,truth,is_observed,obs_value,post_mean,post_std,draw_id,draw_value";
inline constexpr std::string_view kTimingHeader =
    "method,axis,axis_value,fit_time_s,predict_time_s,rmse,runs,seed";

/// Entry point behind the executable. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Applies flat `key = value` lines (with `#` comments) to `cfg` and returns
/// the keys that were set. Keys mirror ExperimentConfig field names; `N` and
/// `n_ens` are synonyms.
std::vector<std::string> apply_config_text(std::string_view text, ExperimentConfig& cfg);

std::vector<Method> parse_methods(std::string_view list);
std::vector<Index> parse_values(std::string_view list);

void write_posterior_csv(std::ostream& os, const KrigingProblem& problem,
                         const std::vector<std::pair<Method, MethodResult>>& results);
void write_timing_row(std::ostream& os, const TimingRecord& record);

}  // namespace menkf::cli
