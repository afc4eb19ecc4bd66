// Copyright 2026 The FPDM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FPDM_IO_HPP_
#define FPDM_IO_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpdm/mechanisms.hpp"
#include "fpdm/network.hpp"
#include "fpdm/pricing.hpp"

namespace fpdm {

// Shortest decimal that parses back to the same double.
std::string format_double(double value);
// Six significant digits, for display.
std::string display_double(double value);

// A tree read from a file. Labels are the integers used in the file; ids are
// dense, assigned in ascending label order (label 0 is the seller).
struct TreeFile {
  SocialTree tree;
  std::vector<std::int64_t> labels;  // by id

  NodeId id_of(std::int64_t label) const;  // throws kInvalidArgument
  std::int64_t label_of(NodeId id) const { return labels.at(id); }
};

//   edge <parent> <child>      one per line; '#' comments; blank lines ignored
TreeFile parse_tree(std::string_view text);
std::string format_tree(const TreeFile& file);

//   <buyer> <value in [0,1]>
ValuationProfile parse_valuations(std::string_view text, const TreeFile& tree);
std::string format_valuations(const ValuationProfile& valuations,
                              const TreeFile& tree);

//   <buyer> -> <child>,<child>,...   |   <buyer> -> nil   |   <buyer> ->
// Omitted buyers diffuse to all their children. The result is canonical.
ActionProfile parse_actions(std::string_view text, const TreeFile& tree);
std::string format_actions(const ActionProfile& actions, const TreeFile& tree);

// Flat `key = value` record of every outcome in a distribution, full
// precision, buyers named by label.
std::string format_outcome_record(const OutcomeDistribution& distribution,
                                  const ValuationProfile& valuations,
                                  const TreeFile& tree,
                                  std::string_view mechanism);
std::map<std::string, std::string> parse_record(std::string_view text);

inline constexpr std::string_view kCurveHeader = "k,x,e_fpdm,e_base,e_opt,ratio";
std::string format_curve_csv(std::span<const RevenuePoint> curve);
std::vector<RevenuePoint> parse_curve_csv(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace fpdm

#endif  // FPDM_IO_HPP_
