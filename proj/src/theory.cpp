#include "dpkit/theory.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dpkit/errors.hpp"
#include "dpkit/rng.hpp"

namespace dpkit::theory {

std::string theory_name(TheoryId t) {
  switch (t) {
    case TheoryId::Dlo: return "dlo";
    case TheoryId::Ddlo: return "ddlo";
    case TheoryId::Eqtree: return "eqtree";
    case TheoryId::EqtreeRev: return "eqtree_rev";
  }
  return "?";
}

TheoryId theory_from_name(const std::string& name) {
  if (name == "dlo") return TheoryId::Dlo;
  if (name == "ddlo") return TheoryId::Ddlo;
  if (name == "eqtree") return TheoryId::Eqtree;
  if (name == "eqtree_rev") return TheoryId::EqtreeRev;
  throw input_error("unknown theory: " + name);
}

int level(const RelationId& r) {
  switch (r.kind) {
    case RelationId::Kind::Equality: return -1;
    case RelationId::Kind::Equiv: return r.n;
    default: throw input_error("level is defined only for equivalence-family relations");
  }
}

bool rel_below(const RelationId& s, const RelationId& t) {
  if (s == t) return true;
  return level(s) < level(t);
}

std::string relation_name(const RelationId& r) {
  switch (r.kind) {
    case RelationId::Kind::Order1: return "<1";
    case RelationId::Kind::Order2: return "<2";
    case RelationId::Kind::Equality: return "=";
    case RelationId::Kind::Equiv:
      return "E(" + std::to_string(r.m) + "," + std::to_string(r.n) + ")";
  }
  return "?";
}

std::vector<RelationId> eq_relations(int level_count) {
  if (level_count < 2) throw input_error("equivalence theories need level_count >= 2");
  std::vector<RelationId> out;
  for (int n = 1; n < level_count; ++n)
    for (int m = 0; m < n; ++m) out.push_back(RelationId::equiv(m, n));
  return out;
}

int eq_relation_index(int level_count, const RelationId& r) {
  if (r.kind != RelationId::Kind::Equiv)
    throw input_error("eq_relation_index expects an equivalence relation");
  if (r.n < 1 || r.n >= level_count || r.m < 0 || r.m >= r.n)
    throw input_error("relation " + relation_name(r) + " does not exist at level_count " +
                      std::to_string(level_count));
  // Levels 1..n-1 contribute 1+2+...+(n-1) relations before level n starts.
  return r.n * (r.n - 1) / 2 + r.m;
}

std::vector<RelationId> incomparable_relations(int level_count, int n) {
  if (n < 1 || n >= level_count)
    throw input_error("incomparable_relations: need 1 <= n < level_count");
  std::vector<RelationId> out;
  for (int m = 0; m < n; ++m) out.push_back(RelationId::equiv(m, n));
  return out;
}

int TheorySample::coord_count() const {
  switch (theory) {
    case TheoryId::Dlo: return 1;
    case TheoryId::Ddlo: return 2;
    case TheoryId::Eqtree:
    case TheoryId::EqtreeRev:
      return params.level_count * (params.level_count - 1) / 2;
  }
  return 0;
}

namespace {

void generate_eq_classes(TheorySample& s, Rng& rng) {
  const int size = s.params.size;
  const int L = s.params.level_count;
  const int b = s.params.branching;
  const bool reversed = s.theory == TheoryId::EqtreeRev;
  const int rel_count = L * (L - 1) / 2;
  for (auto& p : s.points) p.coords.assign(static_cast<std::size_t>(rel_count), -1);

  // cell[i] identifies the block point i occupies in the common refinement of
  // every level already generated. Forward theory generates coarse levels
  // first (top down); the reversed theory generates bottom up.
  std::vector<int> cell(static_cast<std::size_t>(size), 0);
  std::int64_t next_class = 0;

  std::vector<int> levels;
  if (reversed)
    for (int n = 1; n < L; ++n) levels.push_back(n);
  else
    for (int n = L - 1; n >= 1; --n) levels.push_back(n);

  for (int n : levels) {
    std::vector<std::int64_t> level_assignment(static_cast<std::size_t>(size));
    for (int m = 0; m < n; ++m) {
      int rel_idx = eq_relation_index(L, RelationId::equiv(m, n));
      // Group points by current cell, keeping point order inside each group.
      std::map<int, std::vector<int>> groups;
      for (int i = 0; i < size; ++i) groups[cell[static_cast<std::size_t>(i)]].push_back(i);
      std::unordered_map<std::int64_t, std::int64_t> canon;
      for (auto& [cell_id, pts] : groups) {
        (void)cell_id;
        int k = std::min<int>(b, static_cast<int>(pts.size()));
        std::vector<int> order = pts;
        rng.shuffle(order);
        std::unordered_map<int, int> local;  // point -> local class
        for (std::size_t t = 0; t < order.size(); ++t) {
          int cls = t < static_cast<std::size_t>(k) ? static_cast<int>(t)
                                                    : static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
          local[order[t]] = cls;
        }
        // Raw id is unique per (cell, local class); canonical ids are assigned
        // by first occurrence in point order below.
        for (int p : pts)
          level_assignment[static_cast<std::size_t>(p)] =
              static_cast<std::int64_t>(cell_id) * (b + 1) + local[p];
      }
      for (int i = 0; i < size; ++i) {
        std::int64_t raw = level_assignment[static_cast<std::size_t>(i)];
        auto it = canon.find(raw);
        if (it == canon.end()) it = canon.emplace(raw, next_class++).first;
        s.points[static_cast<std::size_t>(i)].coords[static_cast<std::size_t>(rel_idx)] = it->second;
      }
    }
    // Refine cells by everything assigned at this level.
    std::map<std::vector<std::int64_t>, int> rekey;
    for (int i = 0; i < size; ++i) {
      std::vector<std::int64_t> key;
      key.push_back(cell[static_cast<std::size_t>(i)]);
      for (int m = 0; m < n; ++m) {
        int rel_idx = eq_relation_index(L, RelationId::equiv(m, n));
        key.push_back(s.points[static_cast<std::size_t>(i)].coords[static_cast<std::size_t>(rel_idx)]);
      }
      auto it = rekey.find(key);
      if (it == rekey.end()) it = rekey.emplace(key, static_cast<int>(rekey.size())).first;
      cell[static_cast<std::size_t>(i)] = it->second;
    }
  }
}

}  // namespace

TheorySample sample(TheoryId theory, int size, std::uint64_t seed,
                    int level_count, int branching) {
  if (size < 1) throw input_error("sample: size must be at least 1");
  TheorySample s;
  s.theory = theory;
  s.params = {size, 0, 0, seed};
  s.points.resize(static_cast<std::size_t>(size));
  Rng rng(seed);
  switch (theory) {
    case TheoryId::Dlo:
      for (int i = 0; i < size; ++i) s.points[static_cast<std::size_t>(i)].coords = {i};
      break;
    case TheoryId::Ddlo: {
      std::vector<std::int64_t> perm(static_cast<std::size_t>(size));
      for (int i = 0; i < size; ++i) perm[static_cast<std::size_t>(i)] = i;
      rng.shuffle(perm);
      for (int i = 0; i < size; ++i)
        s.points[static_cast<std::size_t>(i)].coords = {i, perm[static_cast<std::size_t>(i)]};
      break;
    }
    case TheoryId::Eqtree:
    case TheoryId::EqtreeRev: {
      if (level_count < 2 || branching < 2)
        throw input_error("equivalence samples need level_count >= 2 and branching >= 2");
      s.params.level_count = level_count;
      s.params.branching = branching;
      generate_eq_classes(s, rng);
      break;
    }
  }
  return s;
}

std::optional<Violation> validate(const TheorySample& s) {
  const int n = static_cast<int>(s.points.size());
  const int coords = s.coord_count();
  for (int i = 0; i < n; ++i)
    if (static_cast<int>(s.points[static_cast<std::size_t>(i)].coords.size()) != coords)
      return Violation{"point has wrong coordinate count for " + theory_name(s.theory), i, -1,
                       RelationId::equality(), RelationId::equality()};

  auto distinct_in = [&](int coord, const char* what) -> std::optional<Violation> {
    std::unordered_map<std::int64_t, int> seen;
    for (int i = 0; i < n; ++i) {
      std::int64_t v = s.points[static_cast<std::size_t>(i)].coords[static_cast<std::size_t>(coord)];
      auto it = seen.find(v);
      if (it != seen.end())
        return Violation{std::string(what) + " ranks collide", it->second, i,
                         RelationId::equality(), RelationId::equality()};
      seen.emplace(v, i);
    }
    return std::nullopt;
  };

  switch (s.theory) {
    case TheoryId::Dlo:
      return distinct_in(0, "order");
    case TheoryId::Ddlo: {
      if (auto v = distinct_in(0, "first order")) return v;
      return distinct_in(1, "second order");
    }
    case TheoryId::Eqtree:
    case TheoryId::EqtreeRev: {
      const int L = s.params.level_count;
      auto rels = eq_relations(L);
      const bool reversed = s.theory == TheoryId::EqtreeRev;
      for (const auto& rs : rels)
        for (const auto& rt : rels) {
          if (level(rs) >= level(rt)) continue;
          // Forward: equal at rs forces equal at rt. Reversed: the converse.
          const auto& fine = reversed ? rt : rs;
          const auto& coarse = reversed ? rs : rt;
          int fi = eq_relation_index(L, fine);
          int ci = eq_relation_index(L, coarse);
          for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
              const auto& pa = s.points[static_cast<std::size_t>(a)].coords;
              const auto& pb = s.points[static_cast<std::size_t>(b)].coords;
              if (pa[static_cast<std::size_t>(fi)] == pb[static_cast<std::size_t>(fi)] &&
                  pa[static_cast<std::size_t>(ci)] != pb[static_cast<std::size_t>(ci)])
                return Violation{"class nesting violated", a, b, rs, rt};
            }
        }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

bool eval_atom(TheoryId theory, int level_count, const RelationId& rel,
               const Point& lhs, const Point& rhs) {
  switch (rel.kind) {
    case RelationId::Kind::Equality:
      return lhs == rhs;
    case RelationId::Kind::Order1:
      if (theory != TheoryId::Dlo && theory != TheoryId::Ddlo)
        throw input_error("order atom used with an equivalence theory");
      return lhs.coords.at(0) < rhs.coords.at(0);
    case RelationId::Kind::Order2:
      if (theory != TheoryId::Ddlo)
        throw input_error("second order atom is only available in ddlo");
      return lhs.coords.at(1) < rhs.coords.at(1);
    case RelationId::Kind::Equiv: {
      if (theory != TheoryId::Eqtree && theory != TheoryId::EqtreeRev)
        throw input_error("equivalence atom used with an order theory");
      int idx = eq_relation_index(level_count, rel);
      return lhs.coords.at(static_cast<std::size_t>(idx)) ==
             rhs.coords.at(static_cast<std::size_t>(idx));
    }
  }
  return false;
}

std::vector<RelationId> theory_relations(TheoryId theory, int level_count) {
  switch (theory) {
    case TheoryId::Dlo: return {RelationId::order1()};
    case TheoryId::Ddlo: return {RelationId::order1(), RelationId::order2()};
    case TheoryId::Eqtree:
    case TheoryId::EqtreeRev: return eq_relations(level_count);
  }
  return {};
}

std::string save_sample_json(const TheorySample& s) {
  nlohmann::json j;
  j["theory"] = theory_name(s.theory);
  nlohmann::json params;
  params["size"] = s.params.size;
  params["seed"] = s.params.seed;
  if (s.theory == TheoryId::Eqtree || s.theory == TheoryId::EqtreeRev) {
    params["level_count"] = s.params.level_count;
    params["branching"] = s.params.branching;
  }
  j["params"] = std::move(params);
  auto pts = nlohmann::json::array();
  for (const auto& p : s.points) pts.push_back(p.coords);
  j["points"] = std::move(pts);
  return j.dump(2) + "\n";
}

TheorySample load_sample_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("sample JSON parse failure: ") + e.what());
  }
  TheorySample s;
  try {
    s.theory = theory_from_name(j.at("theory").get<std::string>());
    const auto& params = j.at("params");
    s.params.size = params.at("size").get<int>();
    s.params.seed = params.value("seed", std::uint64_t{0});
    s.params.level_count = params.value("level_count", 0);
    s.params.branching = params.value("branching", 0);
    for (const auto& row : j.at("points")) {
      Point p;
      p.coords = row.get<std::vector<std::int64_t>>();
      s.points.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("sample JSON shape failure: ") + e.what());
  }
  if (static_cast<int>(s.points.size()) != s.params.size)
    throw io_error("sample JSON: point count disagrees with params.size");
  if (auto v = validate(s)) throw io_error("sample JSON invalid: " + v->message);
  return s;
}

}  // namespace dpkit::theory
