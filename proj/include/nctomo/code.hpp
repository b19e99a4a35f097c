#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nctomo/gf.hpp"
#include "nctomo/paths.hpp"
#include "nctomo/random.hpp"
#include "nctomo/topology.hpp"

namespace nctomo {

/// Per-edge coefficients over GF(2^k). Source j emits the unit vector e_j of
/// length M (one coordinate per source), so each receiver coordinate j carries
/// a scalar combination of source j's paths.
struct CodeAssignment {
  GaloisField field{1};
  std::vector<std::uint32_t> coefficients;  // by edge index, all nonzero

  /// Tree (XOR) mode: GF(2) with every coefficient 1.
  static CodeAssignment xor_mode(std::size_t edge_count) {
    return CodeAssignment{GaloisField(1), std::vector<std::uint32_t>(edge_count, 1)};
  }

  bool is_xor() const {
    return field.k() == 1 && std::all_of(coefficients.begin(), coefficients.end(), [](auto c) { return c == 1; });
  }
};

enum class Ambiguity { pick_first, union_of, intersection };

/// Per-triplet decode data: monomials and every subset sum.
struct TripletTable {
  std::vector<std::uint32_t> monomials;
  /// (subset sum, path mask) sorted by sum then mask.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sums;
  std::size_t distinct = 0;
  double ratio = 1.0;
  /// A few colliding subset pairs (masks over the triplet's paths).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> collisions;
};

struct PathTable {
  std::vector<TripletTable> triplets;  // parallel to PathSet::triplets

  double min_ratio() const {
    double m = 1.0;
    for (const auto& t : triplets) m = std::min(m, t.ratio);
    return m;
  }
  double mean_ratio() const {
    if (triplets.empty()) return 1.0;
    double s = 0;
    for (const auto& t : triplets) s += t.ratio;
    return s / static_cast<double>(triplets.size());
  }
  bool complete() const { return min_ratio() == 1.0; }
};

inline constexpr std::size_t kDefaultPathCap = 25;
inline constexpr std::size_t kMaxReportedCollisions = 32;

/// Path monomial: product of the coefficients along the path (receiver edge included).
inline std::uint32_t path_monomial(const CodeAssignment& code, const Path& p) {
  std::uint32_t m = 1;
  for (auto e : p.edges) m = code.field.mul(m, code.coefficients.at(e));
  return m;
}

/// Enumerates all 2^n subset sums of one triplet's monomials (Gray-code order).
inline TripletTable build_triplet_table(const CodeAssignment& code, const PathSet& ps, const Triplet& tr,
                                        std::size_t cap = kDefaultPathCap) {
  const std::size_t n = tr.paths.size();
  if (n > cap || n > 31)
    throw CapacityError("triplet has " + std::to_string(n) + " paths, above the enumeration cap of " +
                        std::to_string(std::min<std::size_t>(cap, 31)));
  TripletTable t;
  for (auto p : tr.paths) t.monomials.push_back(path_monomial(code, ps.paths[p]));
  const std::uint64_t total = std::uint64_t{1} << n;
  t.sums.resize(total);
  std::uint32_t sum = 0, gray = 0;
  t.sums[0] = {0, 0};
  for (std::uint64_t i = 1; i < total; ++i) {
    const unsigned bit = static_cast<unsigned>(__builtin_ctzll(i));
    gray ^= 1u << bit;
    sum ^= t.monomials[bit];
    t.sums[i] = {sum, gray};
  }
  std::sort(t.sums.begin(), t.sums.end());
  for (std::size_t i = 0; i < t.sums.size(); ++i) {
    if (i == 0 || t.sums[i].first != t.sums[i - 1].first) {
      ++t.distinct;
    } else if (t.collisions.size() < kMaxReportedCollisions) {
      t.collisions.emplace_back(t.sums[i - 1].second, t.sums[i].second);
    }
  }
  t.ratio = static_cast<double>(t.distinct) / static_cast<double>(total);
  return t;
}

/// Path-identifiability check: per-triplet ratio of distinct subset sums to 2^n.
inline PathTable check_code(const CodeAssignment& code, const PathSet& ps, std::size_t cap = kDefaultPathCap) {
  PathTable table;
  table.triplets.reserve(ps.triplets.size());
  for (const auto& tr : ps.triplets) table.triplets.push_back(build_triplet_table(code, ps, tr, cap));
  return table;
}

struct AssignmentResult {
  CodeAssignment code;
  PathTable table;
  std::size_t attempts = 0;
  bool complete = false;  // false: best-found assignment, some triplet ambiguous
};

/// Draws c_e uniformly from the nonzero elements, at most `max_attempts` times,
/// stopping at the first assignment with every triplet ratio 1.
inline AssignmentResult assign_coefficients(const Configuration& cfg, const PathSet& ps, const GaloisField& field,
                                            std::uint64_t seed, std::size_t max_attempts,
                                            std::size_t cap = kDefaultPathCap) {
  const std::uint64_t nonzero = field.order() - 1;
  AssignmentResult best;
  double best_min = -1, best_mean = -1;
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(max_attempts, 1); ++attempt) {
    CodeAssignment code{field, std::vector<std::uint32_t>(cfg.topology.edge_count())};
    for (std::size_t e = 0; e < code.coefficients.size(); ++e)
      code.coefficients[e] = static_cast<std::uint32_t>(1 + counter_hash(seed, attempt, e) % nonzero);
    PathTable table = check_code(code, ps, cap);
    const double mn = table.min_ratio(), me = table.mean_ratio();
    if (mn > best_min || (mn == best_min && me > best_mean)) {
      best_min = mn;
      best_mean = me;
      best.code = std::move(code);
      best.table = std::move(table);
    }
    best.attempts = attempt + 1;
    if (best_min == 1.0) break;
  }
  best.complete = best_min == 1.0;
  return best;
}

/// Candidate path-state masks for one observed symbol; a symbol absent from the
/// table means the observation does not match the assignment.
inline std::uint32_t decode_symbol(const TripletTable& t, std::uint32_t symbol, Ambiguity rule = Ambiguity::pick_first) {
  auto lo = std::lower_bound(t.sums.begin(), t.sums.end(), std::make_pair(symbol, std::uint32_t{0}));
  if (lo == t.sums.end() || lo->first != symbol)
    throw DomainError("observed symbol " + std::to_string(symbol) + " is not an achievable subset sum");
  std::uint32_t acc = lo->second;
  if (rule == Ambiguity::pick_first) return acc;
  for (auto it = lo + 1; it != t.sums.end() && it->first == symbol; ++it)
    acc = rule == Ambiguity::union_of ? (acc | it->second) : (acc & it->second);
  return acc;
}

/// Decodes one symbol per triplet (0 = nothing received) into path-state masks.
inline std::vector<std::uint32_t> decode_observation(const PathTable& table, const std::vector<std::uint32_t>& received,
                                                     Ambiguity rule = Ambiguity::pick_first) {
  if (received.size() != table.triplets.size()) throw DomainError("observation does not match the path table");
  std::vector<std::uint32_t> out(received.size());
  for (std::size_t i = 0; i < received.size(); ++i) out[i] = decode_symbol(table.triplets[i], received[i], rule);
  return out;
}

// ---------------------------------------------------------------- serialization

inline std::string to_hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

inline nlohmann::ordered_json code_to_json(const CodeAssignment& code, const Topology& t) {
  nlohmann::ordered_json j;
  j["k"] = code.field.k();
  j["polynomial"] = to_hex(code.field.polynomial());
  nlohmann::ordered_json coeffs = nlohmann::ordered_json::object();
  for (std::size_t e = 0; e < t.edge_count(); ++e) coeffs[t.edge(e).id] = to_hex(code.coefficients.at(e));
  j["coefficients"] = std::move(coeffs);
  return j;
}

inline CodeAssignment code_from_json(const nlohmann::json& j, const Topology& t) {
  auto hex = [](const nlohmann::json& v) -> std::uint64_t {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    return std::stoull(v.get<std::string>(), nullptr, 16);
  };
  const unsigned k = j.at("k").get<unsigned>();
  CodeAssignment code{GaloisField(k, hex(j.at("polynomial"))), std::vector<std::uint32_t>(t.edge_count(), 0)};
  for (const auto& [id, v] : j.at("coefficients").items()) {
    const std::uint64_t c = hex(v);
    if (c == 0 || (k < 32 && (c >> k) != 0)) throw DomainError("invalid coefficient for edge '" + id + "'");
    code.coefficients[t.edge_index(id)] = static_cast<std::uint32_t>(c);
  }
  for (std::size_t e = 0; e < t.edge_count(); ++e)
    if (code.coefficients[e] == 0) throw DomainError("missing coefficient for edge '" + t.edge(e).id + "'");
  return code;
}

}  // namespace nctomo
