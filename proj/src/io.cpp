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

#include "fpdm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fpdm/error.hpp"

namespace fpdm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// Calls fn(line_number, content) for every non-blank line, comments removed.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (!line.empty()) fn(line_no, line);
    if (end == text.size()) break;
    pos = end + 1;
  }
}

std::int64_t parse_label(std::string_view token, std::size_t line) {
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value < 0) {
    throw ParseError(line, "expected a non-negative integer id, got '" +
                               std::string(token) + "'");
  }
  return value;
}

double parse_value(std::string_view token, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "expected a decimal number, got '" +
                               std::string(token) + "'");
  }
  return value;
}

NodeId buyer_id(const TreeFile& tree, std::int64_t label, std::size_t line) {
  if (label == 0) throw ParseError(line, "id 0 is the seller, not a buyer");
  try {
    return tree.id_of(label);
  } catch (const Error&) {
    throw ParseError(line, "unknown buyer " + std::to_string(label));
  }
}

std::string label_list(std::span<const NodeId> ids, const TreeFile& tree) {
  std::string out;
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (j) out += ',';
    out += std::to_string(tree.label_of(ids[j]));
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string display_double(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

NodeId TreeFile::id_of(std::int64_t label) const {
  const auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label) {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown node label " + std::to_string(label));
  }
  return static_cast<NodeId>(it - labels.begin());
}

TreeFile parse_tree(std::string_view text) {
  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  std::map<std::int64_t, std::size_t> parent_line;
  for_each_line(text, [&](std::size_t line, std::string_view content) {
    const auto tokens = split_ws(content);
    if (tokens.size() != 3 || tokens[0] != "edge") {
      throw ParseError(line, "expected 'edge <parent> <child>'");
    }
    const std::int64_t parent = parse_label(tokens[1], line);
    const std::int64_t child = parse_label(tokens[2], line);
    if (child == 0) throw ParseError(line, "the seller (0) cannot be a child");
    if (parent == child) throw ParseError(line, "self loop on " + std::to_string(child));
    if (const auto it = parent_line.find(child); it != parent_line.end()) {
      throw ParseError(line, "node " + std::to_string(child) +
                                 " already has a parent (line " +
                                 std::to_string(it->second) + ")");
    }
    parent_line[child] = line;
    raw.emplace_back(parent, child);
  });

  TreeFile file;
  file.labels.push_back(0);
  for (const auto& [p, c] : raw) {
    file.labels.push_back(p);
    file.labels.push_back(c);
  }
  std::sort(file.labels.begin(), file.labels.end());
  file.labels.erase(std::unique(file.labels.begin(), file.labels.end()),
                    file.labels.end());
  std::vector<Edge> edges;
  for (const auto& [p, c] : raw) edges.push_back({file.id_of(p), file.id_of(c)});
  file.tree = build_tree(edges);
  return file;
}

std::string format_tree(const TreeFile& file) {
  std::string out;
  for (const Edge& e : file.tree.edges()) {
    out += "edge " + std::to_string(file.label_of(e.parent)) + " " +
           std::to_string(file.label_of(e.child)) + "\n";
  }
  return out;
}

ValuationProfile parse_valuations(std::string_view text, const TreeFile& tree) {
  ValuationProfile out(tree.tree.buyer_count());
  for_each_line(text, [&](std::size_t line, std::string_view content) {
    const auto tokens = split_ws(content);
    if (tokens.size() != 2) throw ParseError(line, "expected '<buyer> <value>'");
    const NodeId id = buyer_id(tree, parse_label(tokens[0], line), line);
    const double value = parse_value(tokens[1], line);
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ParseError(line, "valuation must lie in [0, 1]");
    }
    if (out.has(id)) throw ParseError(line, "duplicate valuation");
    out.set(id, value);
  });
  return out;
}

std::string format_valuations(const ValuationProfile& valuations,
                              const TreeFile& tree) {
  std::string out;
  for (std::size_t i = 1; i <= valuations.buyer_count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (!valuations.has(id)) continue;
    out += std::to_string(tree.label_of(id)) + " " +
           format_double(valuations.at(id)) + "\n";
  }
  return out;
}

ActionProfile parse_actions(std::string_view text, const TreeFile& tree) {
  ActionProfile actions = ActionProfile::truthful(tree.tree);
  std::vector<bool> seen(tree.tree.buyer_count() + 1, false);
  for_each_line(text, [&](std::size_t line, std::string_view content) {
    const auto arrow = content.find("->");
    if (arrow == std::string_view::npos) {
      throw ParseError(line, "expected '<buyer> -> <children>|nil'");
    }
    const std::string_view head = trim(content.substr(0, arrow));
    const std::string_view body = trim(content.substr(arrow + 2));
    const NodeId id = buyer_id(tree, parse_label(head, line), line);
    if (seen[id]) throw ParseError(line, "duplicate action");
    seen[id] = true;
    if (body == "nil") {
      actions.set(id, std::nullopt);
      return;
    }
    std::vector<NodeId> reported;
    const auto kids = tree.tree.children(id);
    std::size_t pos = 0;
    while (!body.empty() && pos <= body.size()) {
      const std::size_t comma = std::min(body.find(',', pos), body.size());
      const std::string_view token = trim(body.substr(pos, comma - pos));
      const NodeId child = buyer_id(tree, parse_label(token, line), line);
      if (!std::binary_search(kids.begin(), kids.end(), child)) {
        throw ParseError(line, "buyer " + std::string(head) +
                                   " has no child " + std::string(token));
      }
      reported.push_back(child);
      pos = comma + 1;
    }
    actions.set(id, std::move(reported));
  });
  return canonicalize(tree.tree, std::move(actions));
}

std::string format_actions(const ActionProfile& actions, const TreeFile& tree) {
  std::string out;
  for (std::size_t i = 1; i <= actions.buyer_count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    const Report& r = actions.report(id);
    out += std::to_string(tree.label_of(id)) + " ->";
    if (!r) {
      out += " nil";
    } else if (!r->empty()) {
      out += " " + label_list(*r, tree);
    }
    out += '\n';
  }
  return out;
}

std::string format_outcome_record(const OutcomeDistribution& distribution,
                                  const ValuationProfile& valuations,
                                  const TreeFile& tree,
                                  std::string_view mechanism) {
  std::ostringstream out;
  out << "mechanism = " << mechanism << '\n';
  out << "outcomes = " << distribution.outcomes.size() << '\n';
  for (std::size_t n = 0; n < distribution.outcomes.size(); ++n) {
    const WeightedOutcome& wo = distribution.outcomes[n];
    const Outcome& o = wo.outcome;
    const std::string p = "outcome." + std::to_string(n) + ".";
    const auto label = [&](std::optional<NodeId> id) {
      return id ? std::to_string(tree.label_of(*id)) : std::string("none");
    };
    out << p << "probability = " << format_double(wo.probability) << '\n';
    out << p << "winner = " << label(o.winner) << '\n';
    out << p << "branch = " << label(o.winning_branch) << '\n';
    out << p << "price = " << format_double(o.price) << '\n';
    out << p << "gross_revenue = " << format_double(o.gross_revenue) << '\n';
    out << p << "net_revenue = " << format_double(o.net_revenue) << '\n';
    const UtilityVector u = utilities(o, valuations);
    for (std::size_t i = 1; i < o.payments.size(); ++i) {
      out << p << "payment." << tree.label_of(static_cast<NodeId>(i)) << " = "
          << format_double(o.payments[i]) << '\n';
    }
    for (std::size_t i = 1; i < u.size(); ++i) {
      out << p << "utility." << tree.label_of(static_cast<NodeId>(i)) << " = "
          << format_double(u[i]) << '\n';
    }
    for (std::size_t v = 0; v < o.trace.visits.size(); ++v) {
      const BranchVisit& visit = o.trace.visits[v];
      out << p << "visit." << v << " = root=" << tree.label_of(visit.root)
          << " price=" << format_double(visit.price) << " size=" << visit.size
          << " outside=" << visit.outside
          << " claimers=" << label_list(visit.claimers, tree) << '\n';
    }
    out << p << "shallowest = " << label_list(o.trace.shallowest, tree) << '\n';
    out << p << "most_children = " << label_list(o.trace.most_children, tree)
        << '\n';
    out << p << "tied = " << label_list(o.trace.tied, tree) << '\n';
  }
  return out.str();
}

std::map<std::string, std::string> parse_record(std::string_view text) {
  std::map<std::string, std::string> out;
  for_each_line(text, [&](std::size_t line, std::string_view content) {
    const auto eq = content.find(" = ");
    if (eq == std::string_view::npos) {
      // Keys with empty values end in " =".
      if (content.size() >= 2 && content.substr(content.size() - 2) == " =") {
        out[std::string(content.substr(0, content.size() - 2))] = "";
        return;
      }
      throw ParseError(line, "expected 'key = value'");
    }
    out[std::string(content.substr(0, eq))] = std::string(content.substr(eq + 3));
  });
  return out;
}

std::string format_curve_csv(std::span<const RevenuePoint> curve) {
  std::string out(kCurveHeader);
  out += '\n';
  for (const RevenuePoint& r : curve) {
    out += std::to_string(r.k) + "," + std::to_string(r.x) + "," +
           format_double(r.e_fpdm) + "," + format_double(r.e_base) + "," +
           format_double(r.e_opt) + "," + format_double(r.ratio) + "\n";
  }
  return out;
}

std::vector<RevenuePoint> parse_curve_csv(std::string_view text) {
  std::vector<RevenuePoint> out;
  bool header = true;
  for_each_line(text, [&](std::size_t line, std::string_view content) {
    if (header) {
      if (content != kCurveHeader) throw ParseError(line, "unexpected CSV header");
      header = false;
      return;
    }
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = content.find(',', pos);
      cells.push_back(content.substr(pos, comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (cells.size() != 6) throw ParseError(line, "expected 6 columns");
    RevenuePoint r;
    r.k = parse_label(cells[0], line);
    r.x = parse_label(cells[1], line);
    r.e_fpdm = parse_value(cells[2], line);
    r.e_base = parse_value(cells[3], line);
    r.e_opt = parse_value(cells[4], line);
    r.ratio = parse_value(cells[5], line);
    out.push_back(r);
  });
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace fpdm
