#include "dpkit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "dpkit/density.hpp"
#include "dpkit/errors.hpp"
#include "dpkit/formula.hpp"
#include "dpkit/indisc.hpp"
#include "dpkit/oracle.hpp"
#include "dpkit/patterns.hpp"
#include "dpkit/rng.hpp"
#include "dpkit/setfam.hpp"
#include "dpkit/theory.hpp"
#include "dpkit/transforms.hpp"

namespace dpkit::harness {

namespace {

using theory::Formula;
using theory::Point;
using theory::PointTuple;
using theory::TheoryId;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void add_check(Report& rep, const std::string& id, const std::string& claim,
               bool pass, const std::string& measured) {
  rep.checks.push_back({id, claim, pass, measured});
}

class CsvTable {
 public:
  explicit CsvTable(std::string header) { out_ << header << "\n"; }
  template <typename... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cells, first = false), ...);
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::uint64_t pick_budget(std::uint64_t override_value) {
  if (override_value) return override_value;
  return oracle::env_budget().value_or(oracle::kDefaultDnfBudget);
}

// ---- sauer-audit ----------------------------------------------------------

void run_sauer_audit(ExperimentConfig& cfg, Report& rep) {
  if (!cfg.trials) cfg.trials = 500;
  Rng rng(cfg.seed);
  CsvTable table("trial,ground,members,vc,max_over_bound");
  int bad = 0;
  int worst_vc = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    int ground = 4 + static_cast<int>(rng.below(9));
    int members = 1 + static_cast<int>(rng.below(40));
    setfam::SetFamily fam(ground);
    for (int m = 0; m < members; ++m) {
      std::vector<bool> bits(static_cast<std::size_t>(ground));
      for (int i = 0; i < ground; ++i) bits[static_cast<std::size_t>(i)] = rng.coin();
      fam.add_member(bits);
    }
    int vc = setfam::vc_dimension(fam);
    worst_vc = std::max(worst_vc, vc);
    std::int64_t over = 0;
    for (int m = 0; m <= ground; ++m) {
      std::uint64_t traces = setfam::shatter_function(fam, m).distinct_traces;
      std::uint64_t bound = setfam::sauer_bound(m, vc);
      if (traces > bound) {
        over = std::max<std::int64_t>(
            over, static_cast<std::int64_t>(traces - bound));
      }
    }
    if (over > 0) ++bad;
    table.row(t, ground, members, vc, over);
  }
  add_check(rep, "sauer-audit/1",
            "every sampled family's shatter values stay within the binomial "
            "bound",
            bad == 0,
            std::to_string(cfg.trials - bad) + "/" +
                std::to_string(cfg.trials) + " families, largest vc " +
                std::to_string(worst_vc));
  rep.tables.emplace_back("sauer", table.str());
}

// ---- dual-law --------------------------------------------------------------

void run_dual_law(ExperimentConfig& cfg, Report& rep) {
  if (!cfg.trials) cfg.trials = 200;
  Rng rng(cfg.seed);
  CsvTable table("trial,ground,members,vc,vc_dual,vc_double_dual,ok");
  int bad_vc = 0;
  int bad_incidence = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    int ground = 4 + static_cast<int>(rng.below(7));
    int members = 1 + static_cast<int>(rng.below(30));
    setfam::SetFamily fam(ground);
    for (int m = 0; m < members; ++m) {
      std::vector<bool> bits(static_cast<std::size_t>(ground));
      for (int i = 0; i < ground; ++i) bits[static_cast<std::size_t>(i)] = rng.coin();
      fam.add_member(bits);
    }
    setfam::SetFamily d = setfam::dual(fam);
    setfam::SetFamily dd = setfam::dual(d);
    int vc = setfam::vc_dimension(fam);
    int vcd = setfam::vc_dimension(d);
    int vcdd = setfam::vc_dimension(dd);
    bool ok = vc == vcdd;
    if (!ok) ++bad_vc;
    if (!fam.same_incidence(dd)) ++bad_incidence;
    table.row(t, ground, members, vc, vcd, vcdd, ok ? 1 : 0);
  }
  add_check(rep, "dual-law/1",
            "vc dimension is unchanged by applying the dual twice",
            bad_vc == 0,
            std::to_string(cfg.trials - bad_vc) + "/" +
                std::to_string(cfg.trials) + " families agree");
  add_check(rep, "dual-law/2",
            "the double dual reproduces the original incidence",
            bad_incidence == 0,
            std::to_string(cfg.trials - bad_incidence) + "/" +
                std::to_string(cfg.trials) + " incidences agree");
  rep.tables.emplace_back("dual", table.str());
}

// ---- oracle-brute ----------------------------------------------------------

// Five anchor points, one point in every rank1-gap x rank2-gap cell, and
// nine spare cell points, 50 in all; any one-variable constraint over the
// anchors that is satisfiable at all is satisfiable inside this sample.
theory::TheorySample brute_sample(const std::vector<int>& sigma) {
  theory::TheorySample s;
  s.theory = TheoryId::Ddlo;
  s.params.size = 50;
  auto gap_value = [](int gap, int jitter) -> std::int64_t {
    if (gap == 0) return jitter;
    return 20 * (gap - 1) + 11 + jitter;
  };
  for (int i = 0; i < 5; ++i) {
    s.points.push_back(Point{{20 * i + 10, 20 * sigma[static_cast<std::size_t>(i)] + 10}});
  }
  for (int g1 = 0; g1 < 6; ++g1) {
    for (int g2 = 0; g2 < 6; ++g2) {
      s.points.push_back(Point{{gap_value(g1, g2), gap_value(g2, g1)}});
    }
  }
  constexpr int spare[9][2] = {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 4},
                               {5, 5}, {0, 1}, {1, 0}, {2, 3}};
  for (const auto& cell : spare) {
    s.points.push_back(Point{{gap_value(cell[0], cell[1]) + 6,
                              gap_value(cell[1], cell[0]) + 6}});
  }
  return s;
}

void run_oracle_brute(ExperimentConfig& cfg, Report& rep) {
  if (!cfg.trials) cfg.trials = 1000;
  Rng rng(cfg.seed);
  CsvTable table("case,params,atoms,oracle,brute,match");
  int mismatches = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    std::vector<int> sigma = {0, 1, 2, 3, 4};
    rng.shuffle(sigma);
    theory::TheorySample s = brute_sample(sigma);
    if (auto v = theory::validate(s)) {
      throw contract_error("brute-force sample invalid: " + v->message);
    }

    int np = 1 + static_cast<int>(rng.below(3));
    std::vector<int> anchor = {0, 1, 2, 3, 4};
    rng.shuffle(anchor);
    anchor.resize(static_cast<std::size_t>(np));

    struct RawAtom {
      bool positive;
      theory::RelationId rel;
      bool x_left;
      int param;
    };
    int na = 1 + static_cast<int>(rng.below(6));
    std::vector<RawAtom> atoms;
    oracle::ConstraintSet cs;
    cs.theory = TheoryId::Ddlo;
    cs.x_arity = 1;
    for (int a = 0; a < na; ++a) {
      RawAtom raw;
      switch (rng.below(3)) {
        case 0: raw.rel = theory::RelationId::order1(); break;
        case 1: raw.rel = theory::RelationId::order2(); break;
        default: raw.rel = theory::RelationId::equality(); break;
      }
      raw.positive = rng.coin();
      raw.x_left = raw.rel.kind == theory::RelationId::Kind::Equality
                       ? true
                       : rng.coin();
      raw.param = anchor[rng.below(static_cast<std::uint64_t>(np))];
      atoms.push_back(raw);
      const Point& p = s.points[static_cast<std::size_t>(raw.param)];
      if (raw.x_left) {
        cs.require(raw.positive, raw.rel, oracle::AtomArg::x(0),
                   oracle::AtomArg::param(p));
      } else {
        cs.require(raw.positive, raw.rel, oracle::AtomArg::param(p),
                   oracle::AtomArg::x(0));
      }
    }

    bool oracle_says = oracle::consistent(cs);
    bool brute_says = false;
    for (const Point& c : s.points) {
      bool all = true;
      for (const RawAtom& raw : atoms) {
        const Point& p = s.points[static_cast<std::size_t>(raw.param)];
        bool v = raw.x_left ? theory::eval_atom(TheoryId::Ddlo, 2, raw.rel, c, p)
                            : theory::eval_atom(TheoryId::Ddlo, 2, raw.rel, p, c);
        if (v != raw.positive) {
          all = false;
          break;
        }
      }
      if (all) {
        brute_says = true;
        break;
      }
    }
    if (oracle_says != brute_says) ++mismatches;
    table.row(t, np, na, oracle_says ? 1 : 0, brute_says ? 1 : 0,
              oracle_says == brute_says ? 1 : 0);
  }
  add_check(rep, "oracle-brute/1",
            "oracle verdicts match exhaustive realization search in the "
            "gap-covering sample",
            mismatches == 0,
            std::to_string(cfg.trials - mismatches) + "/" +
                std::to_string(cfg.trials) + " cases agree");
  rep.tables.emplace_back("oracle_brute", table.str());
}

// ---- ddlo-depth ------------------------------------------------------------

void run_ddlo_depth(ExperimentConfig& cfg, Report& rep) {
  if (!cfg.row_length) cfg.row_length = 5;
  patterns::SearchConfig sc;
  sc.theory = TheoryId::Ddlo;
  sc.x_arity = 1;
  sc.max_depth = 3;
  sc.row_length = cfg.row_length;
  sc.seed = cfg.seed;
  sc.eta_budget = pick_budget(cfg.eta_budget);
  sc.dnf_budget = pick_budget(cfg.dnf_budget);
  patterns::SearchResult r = patterns::depth_search(sc);

  std::uint64_t want_eta = 1;
  for (int i = 0; i < r.depth; ++i) {
    want_eta *= static_cast<std::uint64_t>(cfg.row_length);
  }
  add_check(rep, "ddlo-depth/1",
            "library search over both orders settles at depth 2",
            r.depth == 2, "depth " + std::to_string(r.depth));
  add_check(rep, "ddlo-depth/2",
            "the winning depth-2 pattern passes every index-choice check",
            r.verdict.verified && r.verdict.eta_checked == want_eta &&
                want_eta == 25,
            std::to_string(r.verdict.eta_checked) + " checks");
  add_check(rep, "ddlo-depth/3",
            "every depth-3 combination was tried first and failed",
            r.depth < 3,
            std::to_string(r.combos_tried) + " combinations tried");
  CsvTable table("depth,eta_checked,combos_tried");
  table.row(r.depth, r.verdict.eta_checked, r.combos_tried);
  rep.tables.emplace_back("ddlo_depth", table.str());
}

// ---- eqtree-depth ----------------------------------------------------------

void run_eqtree_depth(ExperimentConfig& cfg, Report& rep) {
  if (!cfg.row_length) cfg.row_length = 4;
  std::vector<int> ns;
  if (cfg.n) {
    ns.push_back(cfg.n);
  } else {
    for (int n = 1; n <= 6; ++n) ns.push_back(n);
  }
  patterns::VerifyOptions opts = patterns::default_verify_options();
  if (cfg.eta_budget) opts.eta_budget = cfg.eta_budget;
  if (cfg.dnf_budget) opts.dnf_budget = cfg.dnf_budget;
  if (cfg.arity) opts.max_arity = cfg.arity;

  CsvTable table("n,verified,depth,eta_checked,broken");
  for (int n : ns) {
    patterns::TreeWitness w = patterns::canonical_eqtree_pattern(n, cfg.row_length);
    patterns::PatternVerdict v = patterns::verify(w.spec, opts);
    std::vector<indisc::Sequence> rows;
    for (int r = 0; r < w.spec.depth(); ++r) {
      rows.push_back(patterns::row_sequence(w.spec, r));
    }
    indisc::BrokenReport br = indisc::broken_count(
        rows, patterns::base_points(w.spec), w.c, w.spec.formulas, 2);
    std::string tag = "n=" + std::to_string(n);
    add_check(rep, "eqtree-depth/" + tag + "/verify",
              "the level-" + std::to_string(n) + " witness verifies at depth " +
                  std::to_string(n),
              v.verified && v.depth == n,
              "depth " + std::to_string(v.depth) + ", " +
                  std::to_string(v.eta_checked) + " checks");
    add_check(rep, "eqtree-depth/" + tag + "/broken",
              "the focus point breaks all " + std::to_string(n) + " rows",
              br.broken == n, std::to_string(br.broken) + " rows broken");
    table.row(n, v.verified ? 1 : 0, v.depth, v.eta_checked, br.broken);
  }
  rep.tables.emplace_back("eqtree_depth", table.str());
}

// ---- round-trip ------------------------------------------------------------

patterns::PatternSpec round_trip_pattern(TheoryId th, int k, int row_length,
                                         std::uint64_t seed) {
  if (th == TheoryId::Ddlo) {
    using patterns::PatternUnit;
    std::vector<PatternUnit> units;
    PatternUnit p1{PatternUnit::Kind::OrderPairs, 0, 1, {}};
    PatternUnit p2{PatternUnit::Kind::OrderPairs, 0, 2, {}};
    PatternUnit p3{PatternUnit::Kind::OrderPairs, 1, 1, {}};
    if (k >= 1) units.push_back(p1);
    if (k >= 2) units.push_back(p2);
    if (k >= 3) units.push_back(p3);
    return patterns::assemble(TheoryId::Ddlo, 2, units, row_length, seed);
  }
  return patterns::canonical_eqtree_pattern(k, row_length).spec;
}

void run_round_trip(ExperimentConfig& cfg, Report& rep) {
  if (!cfg.row_length) cfg.row_length = 7;
  std::uint64_t dnf = pick_budget(cfg.dnf_budget);
  patterns::VerifyOptions opts = patterns::default_verify_options();
  if (cfg.eta_budget) opts.eta_budget = cfg.eta_budget;
  opts.dnf_budget = dnf;

  CsvTable table(
      "theory,k,columns,subsets,definable,trace_alternations,rebuilt_depth");
  for (TheoryId th : {TheoryId::Ddlo, TheoryId::Eqtree}) {
    for (int k = 1; k <= 3; ++k) {
      std::string tag = theory::theory_name(th) + "-k" + std::to_string(k);
      std::string measured;
      bool pass = false;
      std::size_t columns = 0, subsets = 0;
      bool definable = false;
      int trace_alt = 0, rebuilt = 0;
      int row_length = std::max(cfg.row_length, 2 * k + 1);
      try {
        patterns::PatternSpec spec =
            round_trip_pattern(th, k, row_length, cfg.seed);
        patterns::PatternVerdict v = patterns::verify(spec, opts);
        if (!v.verified || v.depth != k) {
          throw contract_error("pattern failed to verify at depth " +
                               std::to_string(k));
        }
        transforms::Interleaved il = transforms::pattern_to_interleaved(spec, dnf);
        columns = il.columns.size();
        subsets = il.subsets_checked.size();
        definable = il.all_subsets_definable;
        if (!definable || il.k != k) {
          throw contract_error("subset definability failed");
        }
        std::vector<bool> trace(columns, false);
        for (int i = 0; i < k; ++i) trace[static_cast<std::size_t>(2 * i + 1)] = true;
        trace_alt = transforms::alternation_count(trace);
        transforms::SegmentPattern seg = transforms::alternation_to_pattern(
            spec.sample, il.psi, il.columns, il.column_width, trace, k, opts);
        rebuilt = seg.verdict.depth;
        pass = trace_alt == 2 * k && seg.verdict.verified && rebuilt == k;
        measured = std::to_string(subsets) + " subsets, trace alternations " +
                   std::to_string(trace_alt) + ", rebuilt depth " +
                   std::to_string(rebuilt);
      } catch (const contract_error& e) {
        measured = e.what();
      } catch (const resource_error& e) {
        measured = e.what();
      }
      add_check(rep, "round-trip/" + tag,
                "pattern, subset definability, alternation trace and rebuilt "
                "pattern all agree at depth " + std::to_string(k),
                pass, measured);
      table.row(theory::theory_name(th), k, columns, subsets,
                definable ? 1 : 0, trace_alt, rebuilt);
    }
  }
  rep.tables.emplace_back("round_trip", table.str());
}

// ---- alt-audit and subadditivity -------------------------------------------

// Width-2 tuple sequence, ascending in the first order and descending in the
// second, so both cuts move independently along it.
indisc::Sequence reverse_banded(int len, std::uint64_t seed) {
  Rng rng(seed);
  std::int64_t j1 = static_cast<std::int64_t>(rng.below(32));
  std::int64_t j2 = static_cast<std::int64_t>(rng.below(32));
  theory::TheorySample s;
  s.theory = TheoryId::Ddlo;
  s.params.size = 2 * len;
  s.params.seed = seed;
  std::vector<std::vector<int>> tuples;
  for (int i = 0; i < len; ++i) {
    s.points.push_back(Point{{j1 + 4 * i, j2 + 4 * (len - 1 - i)}});
    s.points.push_back(Point{{j1 + 4 * i + 2, j2 + 4 * (len - 1 - i) + 2}});
    tuples.push_back({2 * i, 2 * i + 1});
  }
  return indisc::make_sequence(s, tuples, 2);
}

indisc::Sequence dlo_blocks(int len, std::uint64_t seed) {
  theory::TheorySample s = theory::sample(TheoryId::Dlo, 2 * len, seed);
  std::vector<std::vector<int>> tuples;
  for (int i = 0; i < len; ++i) tuples.push_back({2 * i, 2 * i + 1});
  return indisc::make_sequence(s, tuples, 2);
}

Formula audit_formula(TheoryId th, std::uint64_t shape, Rng& rng) {
  if (th == TheoryId::Dlo) {
    switch (shape % 4) {
      case 0: {
        static const char* atoms[] = {"x < y0", "y1 < x", "x = y0", "x < y1"};
        Formula f = theory::parse_formula(atoms[rng.below(4)]);
        return rng.coin() ? Formula::negate(f) : f;
      }
      case 1: return theory::parse_formula("y0 < x & x < y1");
      case 2: return theory::parse_formula("x = y0 | (y0 < x & x < y1)");
      default: return theory::parse_formula("(x < y0) <-> (x < y1)");
    }
  }
  switch (shape % 5) {
    case 0: {
      static const char* atoms[] = {"x <1 y0", "x <2 y0", "y1 <2 x", "x = y1"};
      Formula f = theory::parse_formula(atoms[rng.below(4)]);
      return rng.coin() ? Formula::negate(f) : f;
    }
    case 1:
      return rng.coin() ? theory::parse_formula("y0 <1 x & x <1 y1")
                        : theory::parse_formula("y0 <2 x & x <2 y1");
    case 2:
      return theory::parse_formula(
          "(y0 <1 x & x <1 y1) | (y0 <2 x & x <2 y1)");
    case 3: return theory::parse_formula("(x <1 y0) <-> (x <2 y1)");
    default: return theory::parse_formula("x = y0 | (y0 <2 x & x <2 y1)");
  }
}

void run_alt_audit(ExperimentConfig& cfg, Report& rep) {
  if (!cfg.trials) cfg.trials = 1000;
  std::uint64_t dnf = pick_budget(cfg.dnf_budget);
  CsvTable table("theory,trial,shape,length,alternations,nodes");
  for (TheoryId th : {TheoryId::Dlo, TheoryId::Ddlo}) {
    Rng rng(cfg.seed + (th == TheoryId::Dlo ? 0 : 1));
    int bound = th == TheoryId::Dlo ? 3 : 5;
    int target = th == TheoryId::Dlo ? 3 : 4;
    int max_seen = 0;
    int violations = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      std::uint64_t shape = rng.below(th == TheoryId::Dlo ? 4 : 5);
      int len = 5 + static_cast<int>(rng.below(3));
      std::uint64_t sseed = rng.next();
      indisc::Sequence seq = th == TheoryId::Dlo ? dlo_blocks(len, sseed)
                                                 : reverse_banded(len, sseed);
      Formula phi = audit_formula(th, shape, rng);
      transforms::AltSearchResult r = transforms::alternation_search(phi, seq, dnf);
      max_seen = std::max(max_seen, r.max_alternations);
      if (r.max_alternations > bound) ++violations;
      table.row(theory::theory_name(th), t, shape, len, r.max_alternations,
                r.nodes);
    }
    std::string name = theory::theory_name(th);
    add_check(rep, "alt-audit/" + name + "-bound",
              name + " alternations never exceed " + std::to_string(bound),
              violations == 0,
              std::to_string(violations) + " violations, max " +
                  std::to_string(max_seen));
    add_check(rep, "alt-audit/" + name + "-attained",
              "some " + name + " search reaches " + std::to_string(target) +
                  " alternations",
              max_seen >= target, "max " + std::to_string(max_seen));
  }
  rep.tables.emplace_back("alt_audit", table.str());
}

Formula pair_audit_formula(std::uint64_t shape) {
  switch (shape % 5) {
    case 0:
      return theory::parse_formula(
          "(y0 <1 x0 & x0 <1 y1) | (y0 <2 x1 & x1 <2 y1)");
    case 1:
      return theory::parse_formula(
          "(y0 <1 x0 & x0 <1 y1) | (y0 <1 x1 & x1 <1 y1)");
    case 2: return theory::parse_formula("x0 = y0 | x1 = y1");
    case 3:
      return theory::parse_formula(
          "(y0 <1 x0 & x0 <1 y1) | (y0 <2 x0 & x0 <2 y1) | "
          "(y0 <1 x1 & x1 <1 y1) | (y0 <2 x1 & x1 <2 y1)");
    default: return theory::parse_formula("(x0 <1 y0) <-> (x1 <2 y1)");
  }
}

void run_subadditivity(ExperimentConfig& cfg, Report& rep) {
  if (!cfg.trials) cfg.trials = 500;
  std::uint64_t dnf = cfg.dnf_budget ? cfg.dnf_budget : 16384;
  int search_seeds = cfg.trials < 100 ? 1 : 5;

  CsvTable search_table("seed,depth,combos_tried");
  bool attained = true;
  bool never_exceeds = true;
  for (int s = 0; s < search_seeds; ++s) {
    patterns::SearchConfig sc;
    sc.theory = TheoryId::Ddlo;
    sc.x_arity = 2;
    sc.max_depth = 5;
    sc.row_length = cfg.row_length ? cfg.row_length : 4;
    sc.seed = cfg.seed + static_cast<std::uint64_t>(s);
    sc.dnf_budget = dnf;
    patterns::SearchResult r = patterns::depth_search(sc);
    if (r.depth != 4) attained = false;
    if (r.depth > 4) never_exceeds = false;
    search_table.row(sc.seed, r.depth, r.combos_tried);
  }
  add_check(rep, "subadditivity/1",
            "two-variable library search attains depth 4",
            attained, std::to_string(search_seeds) + " seeds");
  add_check(rep, "subadditivity/2",
            "no two-variable library combination verifies past depth 4",
            never_exceeds, "max depth tried 5");

  Rng rng(cfg.seed);
  CsvTable alt_table("trial,shape,length,alternations,nodes");
  int violations = 0;
  int max_seen = 0;
  for (int t = 0; t < cfg.trials; ++t) {
    std::uint64_t shape = rng.below(5);
    int len = 5 + static_cast<int>(rng.below(3));
    std::uint64_t sseed = rng.next();
    indisc::Sequence seq = reverse_banded(len, sseed);
    Formula phi = pair_audit_formula(shape);
    transforms::AltSearchResult r = transforms::alternation_search(phi, seq, dnf);
    max_seen = std::max(max_seen, r.max_alternations);
    if (r.max_alternations > 9) ++violations;
    alt_table.row(t, shape, len, r.max_alternations, r.nodes);
  }
  add_check(rep, "subadditivity/3",
            "two-variable alternations never exceed 9", violations == 0,
            std::to_string(violations) + " violations, max " +
                std::to_string(max_seen));
  rep.tables.emplace_back("pair_search", search_table.str());
  rep.tables.emplace_back("pair_alt", alt_table.str());
}

// ---- density-exponents ------------------------------------------------------

void run_density_exponents(ExperimentConfig& cfg, Report& rep) {
  int max_size = cfg.n ? cfg.n : 512;
  std::vector<int> sizes;
  for (int n = 8; n <= max_size; n *= 2) sizes.push_back(n);
  if (sizes.size() < 3) {
    throw input_error("size parameter must be at least 32, have " +
                      std::to_string(max_size));
  }
  int top = sizes.back();

  theory::TheorySample dlo = theory::sample(TheoryId::Dlo, top, cfg.seed);
  theory::TheorySample ddlo = theory::sample(TheoryId::Ddlo, top, cfg.seed);
  std::vector<Formula> d1 = {theory::parse_formula("x < y0"),
                             theory::parse_formula("x = y0")};
  std::vector<Formula> d2 = {theory::parse_formula("x <1 y0"),
                             theory::parse_formula("x <2 y0"),
                             theory::parse_formula("x = y0")};
  density::CountTable t1 = density::count_table(dlo, d1, sizes);
  density::CountTable t2 = density::count_table(ddlo, d2, sizes);
  density::ExponentFit f1 = density::fit_exponent(t1.sizes, t1.counts);
  density::ExponentFit f2 = density::fit_exponent(t2.sizes, t2.counts);

  std::vector<std::uint64_t> sq, cube;
  for (int n : sizes) {
    sq.push_back(static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n));
    cube.push_back(static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n) *
                   static_cast<std::uint64_t>(n));
  }
  density::ExponentFit fsq = density::fit_exponent(sizes, sq);
  density::ExponentFit fcube = density::fit_exponent(sizes, cube);
  double syn_err = std::max(std::abs(fsq.slope - 2.0), std::abs(fcube.slope - 3.0));

  add_check(rep, "density-exponents/1",
            "dlo growth fits a slope within [0.85, 1.15]",
            f1.slope >= 0.85 && f1.slope <= 1.15, "slope " + fmt_double(f1.slope));
  add_check(rep, "density-exponents/2",
            "ddlo growth fits a slope within [1.8, 2.2]",
            f2.slope >= 1.8 && f2.slope <= 2.2, "slope " + fmt_double(f2.slope));
  add_check(rep, "density-exponents/3",
            "exact power laws are recovered to 1e-9", syn_err <= 1e-9,
            "max slope error " + fmt_double(syn_err * 1e9) + "e-9");

  CsvTable syn("theory,delta,n,count,trials,seed");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    syn.row("synthetic", "n^2", sizes[i], sq[i], 1, 0);
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    syn.row("synthetic", "n^3", sizes[i], cube[i], 1, 0);
  }
  rep.tables.emplace_back("density_dlo", density::table_csv(t1));
  rep.tables.emplace_back("density_ddlo", density::table_csv(t2));
  rep.tables.emplace_back("density_synthetic", syn.str());
}

// ---- switchpoints -----------------------------------------------------------

void run_switchpoints(ExperimentConfig& cfg, Report& rep) {
  std::vector<int> ks;
  if (cfg.k) {
    ks.push_back(cfg.k);
  } else {
    for (int k = 1; k <= 4; ++k) ks.push_back(k);
  }
  CsvTable table("k,candidate,alternations,pairs,eval_agrees");
  for (int k : ks) {
    int n = 4 * (k + 1);
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) {
      int run = i / 4;
      std::int64_t r2 = run % 2 == 0 ? 1000 + i : -1000 + i;
      pts.push_back(Point{{10 * (i + 1), r2}});
    }
    PointTuple c = {Point{{5, 0}}};
    Formula phi = theory::parse_formula("x <2 y0");

    std::vector<std::vector<int>> cols;
    std::vector<bool> planted;
    for (int i = 0; i < n; ++i) {
      cols.push_back({i});
      planted.push_back(theory::eval(phi, TheoryId::Ddlo, 2, c,
                                     {pts[static_cast<std::size_t>(i)]}));
    }
    // A flat decoy trace first, so candidate selection has to work.
    std::vector<bool> flat(static_cast<std::size_t>(n), true);
    transforms::SwitchConstruction sc = transforms::switchpoints_to_alternation(
        phi, 1, cols, {flat, planted}, k);

    bool eval_agrees = sc.found;
    if (sc.found) {
      for (std::size_t p = 0; p < sc.pairs.size(); ++p) {
        PointTuple args;
        for (int idx : sc.pairs[p]) {
          args.push_back(pts[static_cast<std::size_t>(idx)]);
        }
        bool v = theory::eval(sc.psi2, TheoryId::Ddlo, 2, c, args);
        if (v != sc.trace2[p]) eval_agrees = false;
      }
    }
    add_check(rep, "switchpoints/k=" + std::to_string(k),
              "planted " + std::to_string(k) +
                  "-switch trace doubles to exactly " + std::to_string(2 * k) +
                  " alternations",
              sc.found && sc.candidate == 1 && sc.k == k &&
                  sc.alternations == 2 * k && eval_agrees,
              std::to_string(sc.alternations) + " alternations, " +
                  std::to_string(sc.pairs.size()) + " pairs");
    table.row(k, sc.candidate, sc.alternations, sc.pairs.size(),
              eval_agrees ? 1 : 0);
  }
  rep.tables.emplace_back("switchpoints", table.str());
}

// ---- determinism ------------------------------------------------------------

Report run_registered(const ExperimentConfig& config);

void run_determinism(ExperimentConfig& cfg, Report& rep) {
  struct Mini {
    const char* name;
    int trials;
    int n;
  };
  const Mini minis[] = {
      {"sauer-audit", 25, 0},   {"dual-law", 25, 0},
      {"oracle-brute", 50, 0},  {"ddlo-depth", 0, 0},
      {"eqtree-depth", 0, 3},   {"round-trip", 0, 0},
      {"alt-audit", 50, 0},     {"subadditivity", 25, 0},
      {"density-exponents", 0, 64}, {"switchpoints", 0, 0},
  };
  CsvTable table("experiment,bytes,identical");
  bool all_same = true;
  for (const Mini& m : minis) {
    ExperimentConfig sub;
    sub.name = m.name;
    sub.seed = cfg.seed;
    sub.trials = m.trials;
    sub.n = m.n;
    if (std::string(m.name) == "round-trip") sub.row_length = 5;
    std::string first = report_csv(run_registered(sub));
    std::string second = report_csv(run_registered(sub));
    bool same = first == second;
    if (!same) all_same = false;
    table.row(m.name, first.size(), same ? 1 : 0);
  }
  add_check(rep, "determinism/1",
            "every experiment re-run with the same seed emits identical CSV",
            all_same, "10 experiments, 2 runs each");
  rep.tables.emplace_back("determinism", table.str());
}

// ---- registry ----------------------------------------------------------------

struct Entry {
  const char* name;
  void (*fn)(ExperimentConfig&, Report&);
};

const Entry kRegistry[] = {
    {"sauer-audit", run_sauer_audit},
    {"dual-law", run_dual_law},
    {"oracle-brute", run_oracle_brute},
    {"ddlo-depth", run_ddlo_depth},
    {"eqtree-depth", run_eqtree_depth},
    {"round-trip", run_round_trip},
    {"alt-audit", run_alt_audit},
    {"subadditivity", run_subadditivity},
    {"density-exponents", run_density_exponents},
    {"switchpoints", run_switchpoints},
    {"determinism", run_determinism},
};

Report run_registered(const ExperimentConfig& config) {
  if (config.trials < 0 || config.n < 0 || config.k < 0 || config.arity < 0 ||
      config.row_length < 0) {
    throw input_error("experiment parameters must not be negative");
  }
  for (const Entry& e : kRegistry) {
    if (config.name == e.name) {
      Report rep;
      rep.name = config.name;
      rep.config = config;
      auto start = std::chrono::steady_clock::now();
      e.fn(rep.config, rep);
      auto stop = std::chrono::steady_clock::now();
      rep.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        stop - start)
                        .count();
      return rep;
    }
  }
  std::string known;
  for (const Entry& e : kRegistry) {
    if (!known.empty()) known += ", ";
    known += e.name;
  }
  throw input_error("unknown experiment '" + config.name + "'; known: " + known);
}

}  // namespace

bool Report::pass() const {
  for (const CheckRecord& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const Entry& e : kRegistry) out.emplace_back(e.name);
  return out;
}

Report run_experiment(const ExperimentConfig& config) {
  return run_registered(config);
}

std::string report_text(const Report& report) {
  std::ostringstream out;
  out << "experiment: " << report.name << "\n";
  out << "seed: " << report.config.seed << "\n";
  out << "trials: " << report.config.trials << "\n";
  out << "n: " << report.config.n << "\n";
  out << "k: " << report.config.k << "\n";
  out << "arity: " << report.config.arity << "\n";
  out << "row_length: " << report.config.row_length << "\n";
  for (const CheckRecord& c : report.checks) {
    out << "check " << c.claim_id << ": " << (c.pass ? "PASS" : "FAIL") << " "
        << c.claim << " [" << c.measured << "]\n";
  }
  out << "VERDICT: " << (report.pass() ? "PASS" : "FAIL") << "\n";
  out << "wall_ms: " << report.wall_ms << "\n";
  return out.str();
}

std::string report_csv(const Report& report) {
  std::string out;
  for (const auto& [name, csv] : report.tables) {
    (void)name;
    out += csv;
  }
  return out;
}

void emit(const Report& report, const std::string& stem) {
  namespace fs = std::filesystem;
  fs::path txt = stem + ".txt";
  fs::path csv = stem + ".csv";
  std::error_code ec;
  if (txt.has_parent_path()) {
    fs::create_directories(txt.parent_path(), ec);
    if (ec) {
      throw io_error("cannot create directory " + txt.parent_path().string() +
                     ": " + ec.message());
    }
  }
  std::ofstream t(txt, std::ios::binary);
  if (!t) throw io_error("cannot open " + txt.string() + " for writing");
  t << report_text(report);
  if (!t.good()) throw io_error("failed writing " + txt.string());
  std::ofstream c(csv, std::ios::binary);
  if (!c) throw io_error("cannot open " + csv.string() + " for writing");
  c << report_csv(report);
  if (!c.good()) throw io_error("failed writing " + csv.string());
}

}  // namespace dpkit::harness
