#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpkit/density.hpp"
#include "dpkit/errors.hpp"
#include "dpkit/formula.hpp"
#include "dpkit/harness.hpp"
#include "dpkit/indisc.hpp"
#include "dpkit/oracle.hpp"
#include "dpkit/patterns.hpp"
#include "dpkit/setfam.hpp"
#include "dpkit/theory.hpp"
#include "dpkit/transforms.hpp"

namespace {

using namespace dpkit;

theory::TheoryId theory_from_name(const std::string& name) {
  if (name == "dlo") return theory::TheoryId::Dlo;
  if (name == "ddlo") return theory::TheoryId::Ddlo;
  if (name == "eqtree") return theory::TheoryId::Eqtree;
  if (name == "eqtree-rev") return theory::TheoryId::EqtreeRev;
  throw input_error("unknown theory '" + name +
                    "'; expected dlo, ddlo, eqtree or eqtree-rev");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw io_error("failed reading " + path);
  return buf.str();
}

void write_output(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw io_error("cannot open " + out + " for writing");
  f << text;
  if (!f.good()) throw io_error("failed writing " + out);
}

std::vector<theory::Formula> parse_delta(const std::string& spec) {
  std::vector<theory::Formula> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(theory::parse_formula(item));
  }
  if (out.empty()) throw input_error("empty formula list '" + spec + "'");
  return out;
}

indisc::Sequence block_sequence(const theory::TheorySample& s, int width) {
  if (width <= 0) throw input_error("width must be positive");
  int len = static_cast<int>(s.points.size()) / width;
  if (len < 2) throw input_error("sample too small for width " +
                                 std::to_string(width));
  std::vector<std::vector<int>> tuples;
  for (int i = 0; i < len; ++i) {
    std::vector<int> t;
    for (int j = 0; j < width; ++j) t.push_back(width * i + j);
    tuples.push_back(t);
  }
  return indisc::make_sequence(s, tuples, width);
}

struct Global {
  std::uint64_t seed = 42;
  std::string out;
  std::uint64_t budget = 0;
  int arity = 0;

  std::uint64_t dnf() const {
    if (budget) return budget;
    return oracle::env_budget().value_or(oracle::kDefaultDnfBudget);
  }
};

int run_cli(int argc, char** argv) {
  CLI::App app{"dpkit: finite-model dp-rank toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output path (report stem for run)");
  app.add_option("--budget", g.budget, "search budget override");
  app.add_option("--arity", g.arity, "indiscernibility arity");

  // run
  auto* run = app.add_subcommand("run", "run a registered experiment");
  std::string exp_name;
  harness::ExperimentConfig cfg;
  run->add_option("experiment", exp_name, "experiment name")->required();
  run->add_option("--trials", cfg.trials, "trial count");
  run->add_option("--n", cfg.n, "size or level parameter");
  run->add_option("--k", cfg.k, "depth or switch parameter");
  run->add_option("--row-length", cfg.row_length, "pattern row length");
  run->add_flag("--list", "ignored; kept for discoverability");

  // vc
  auto* vc = app.add_subcommand("vc", "VC dimension of a family");
  std::string family_path;
  vc->add_option("--family", family_path, "family JSON file")->required();

  // shatter
  auto* shatter = app.add_subcommand("shatter", "shatter function of a family");
  std::string shatter_family;
  int shatter_m = -1;
  shatter->add_option("--family", shatter_family, "family JSON file")->required();
  shatter->add_option("--m", shatter_m, "single subset size (default: all)");

  // density
  auto* density_cmd = app.add_subcommand("density", "type-counting table");
  std::string den_theory = "dlo";
  std::string den_delta;
  int den_max = 64;
  int den_levels = 2;
  int den_branching = 2;
  bool den_fit = false;
  density_cmd->add_option("--theory", den_theory, "dlo|ddlo|eqtree|eqtree-rev");
  density_cmd->add_option("--delta", den_delta,
                          "semicolon-separated formulas, e.g. 'x < y0;x = y0'")
      ->required();
  density_cmd->add_option("--max-n", den_max, "largest prefix size");
  density_cmd->add_option("--levels", den_levels, "level count (trees)");
  density_cmd->add_option("--branching", den_branching, "branching (trees)");
  density_cmd->add_flag("--fit", den_fit, "append a log-log exponent fit");

  // indisc
  auto* ind = app.add_subcommand("indisc", "indiscernibility check");
  std::string ind_sample;
  std::string ind_theory = "dlo";
  int ind_size = 12;
  int ind_width = 1;
  int ind_levels = 2;
  int ind_branching = 2;
  std::string ind_delta;
  ind->add_option("--sample", ind_sample, "sample JSON file (else generated)");
  ind->add_option("--theory", ind_theory, "theory when generating");
  ind->add_option("--size", ind_size, "sample size when generating");
  ind->add_option("--levels", ind_levels, "level count (trees)");
  ind->add_option("--branching", ind_branching, "branching (trees)");
  ind->add_option("--width", ind_width, "tuple width");
  ind->add_option("--delta", ind_delta, "formulas restricting the relations");

  // pattern
  auto* pattern = app.add_subcommand("pattern", "randomness patterns");
  pattern->require_subcommand(1);
  auto* pverify = pattern->add_subcommand("verify", "verify a pattern file");
  std::string pattern_path;
  pverify->add_option("--pattern", pattern_path, "pattern JSON file")->required();
  auto* psearch = pattern->add_subcommand("search", "library depth search");
  std::string ps_theory = "ddlo";
  int ps_x_arity = 1;
  int ps_max_depth = 4;
  int ps_row_length = 4;
  int ps_levels = 2;
  std::string ps_emit;
  psearch->add_option("--theory", ps_theory, "theory");
  psearch->add_option("--x-arity", ps_x_arity, "realization variables");
  psearch->add_option("--max-depth", ps_max_depth, "largest depth to try");
  psearch->add_option("--row-length", ps_row_length, "row length");
  psearch->add_option("--levels", ps_levels, "level count (trees)");
  psearch->add_option("--emit-pattern", ps_emit,
                      "write the winning pattern as JSON");

  // transform
  auto* transform = app.add_subcommand("transform", "equivalence transforms");
  transform->require_subcommand(1);
  auto* talt = transform->add_subcommand("alt", "max alternations of a formula");
  std::string ta_theory = "dlo";
  std::string ta_formula;
  int ta_length = 6;
  talt->add_option("--theory", ta_theory, "dlo or ddlo");
  talt->add_option("--formula", ta_formula, "formula over x, y0, y1")->required();
  talt->add_option("--length", ta_length, "sequence length");
  auto* tinter = transform->add_subcommand(
      "interleave", "subset definability of a verified pattern");
  std::string ti_pattern;
  tinter->add_option("--pattern", ti_pattern, "pattern JSON file")->required();

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "generate a model sample");
  std::string sm_theory = "dlo";
  int sm_size = 16;
  int sm_levels = 2;
  int sm_branching = 2;
  sample_cmd->add_option("--theory", sm_theory, "theory");
  sample_cmd->add_option("--size", sm_size, "point count");
  sample_cmd->add_option("--levels", sm_levels, "level count (trees)");
  sample_cmd->add_option("--branching", sm_branching, "branching (trees)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) {
    cfg.name = exp_name;
    cfg.seed = g.seed;
    cfg.arity = g.arity;
    cfg.eta_budget = g.budget;
    cfg.dnf_budget = g.budget;
    cfg.out = g.out;
    harness::Report rep = harness::run_experiment(cfg);
    std::cout << harness::report_text(rep);
    if (!g.out.empty()) harness::emit(rep, g.out);
    return rep.pass() ? 0 : 1;
  }

  if (vc->parsed()) {
    setfam::SetFamily fam = setfam::load_family_json(read_file(family_path));
    write_output("vc: " + std::to_string(setfam::vc_dimension(fam)) + "\n",
                 g.out);
    return 0;
  }

  if (shatter->parsed()) {
    setfam::SetFamily fam = setfam::load_family_json(read_file(shatter_family));
    std::ostringstream out;
    out << "m,distinct_traces,bound\n";
    int vc_dim = setfam::vc_dimension(fam);
    int lo = shatter_m >= 0 ? shatter_m : 0;
    int hi = shatter_m >= 0 ? shatter_m : fam.ground_size();
    for (int m = lo; m <= hi; ++m) {
      out << m << "," << setfam::shatter_function(fam, m).distinct_traces
          << "," << setfam::sauer_bound(m, vc_dim) << "\n";
    }
    write_output(out.str(), g.out);
    return 0;
  }

  if (density_cmd->parsed()) {
    theory::TheoryId th = theory_from_name(den_theory);
    bool tree = th == theory::TheoryId::Eqtree || th == theory::TheoryId::EqtreeRev;
    theory::TheorySample s =
        tree ? theory::sample(th, den_max, g.seed, den_levels, den_branching)
             : theory::sample(th, den_max, g.seed);
    std::vector<int> sizes;
    for (int n = 1; n <= den_max; n *= 2) sizes.push_back(n);
    if (sizes.back() != den_max) sizes.push_back(den_max);
    density::CountTable table =
        density::count_table(s, parse_delta(den_delta), sizes, g.dnf());
    std::string text = density::table_csv(table);
    if (den_fit) {
      density::ExponentFit fit = density::fit_exponent(table.sizes, table.counts);
      char buf[128];
      std::snprintf(buf, sizeof(buf), "# slope %.6f rms %.6f points %d\n",
                    fit.slope, fit.residual_rms, fit.points_used);
      text += buf;
    }
    write_output(text, g.out);
    return 0;
  }

  if (ind->parsed()) {
    theory::TheoryId th = theory_from_name(ind_theory);
    theory::TheorySample s;
    if (!ind_sample.empty()) {
      s = theory::load_sample_json(read_file(ind_sample));
    } else {
      bool tree =
          th == theory::TheoryId::Eqtree || th == theory::TheoryId::EqtreeRev;
      s = tree ? theory::sample(th, ind_size, g.seed, ind_levels, ind_branching)
               : theory::sample(th, ind_size, g.seed);
    }
    std::vector<theory::Formula> delta;
    if (!ind_delta.empty()) delta = parse_delta(ind_delta);
    indisc::Sequence seq = block_sequence(s, ind_width);
    int arity = g.arity ? g.arity : 2;
    indisc::Report rep = indisc::check(seq, {}, delta, arity);
    std::ostringstream out;
    out << "length: " << seq.length() << "\n";
    out << "arity_checked: " << rep.arity_checked << "\n";
    out << "indiscernible: " << (rep.ok ? "yes" : "no") << "\n";
    if (rep.witness) {
      out << "witness: " << theory::print_formula(rep.witness->atom) << "\n";
    }
    write_output(out.str(), g.out);
    return rep.ok ? 0 : 1;
  }

  if (pverify->parsed()) {
    patterns::PatternSpec spec =
        patterns::load_pattern_json(read_file(pattern_path));
    patterns::VerifyOptions opts = patterns::default_verify_options();
    if (g.arity) opts.max_arity = g.arity;
    if (g.budget) {
      opts.eta_budget = g.budget;
      opts.dnf_budget = g.budget;
    }
    patterns::PatternVerdict v = patterns::verify(spec, opts);
    std::ostringstream out;
    out << "depth: " << v.depth << "\n";
    out << "mutually_indiscernible: " << (v.mutual_ok ? "yes" : "no") << "\n";
    out << "eta_checked: " << v.eta_checked << "\n";
    out << "verified: " << (v.verified ? "yes" : "no") << "\n";
    write_output(out.str(), g.out);
    return v.verified ? 0 : 1;
  }

  if (psearch->parsed()) {
    patterns::SearchConfig sc;
    sc.theory = theory_from_name(ps_theory);
    sc.level_count = ps_levels;
    sc.x_arity = ps_x_arity;
    sc.max_depth = ps_max_depth;
    sc.row_length = ps_row_length;
    sc.seed = g.seed;
    if (g.arity) sc.max_arity = g.arity;
    if (g.budget) {
      sc.eta_budget = g.budget;
      sc.dnf_budget = g.budget;
    } else if (auto b = oracle::env_budget()) {
      sc.eta_budget = *b;
      sc.dnf_budget = *b;
    }
    patterns::SearchResult r = patterns::depth_search(sc);
    if (!ps_emit.empty()) {
      if (r.depth <= 0) throw input_error("no pattern verified; nothing to emit");
      write_output(patterns::save_pattern_json(r.best), ps_emit);
    }
    std::ostringstream out;
    out << "depth: " << r.depth << "\n";
    out << "combos_tried: " << r.combos_tried << "\n";
    write_output(out.str(), g.out);
    return 0;
  }

  if (talt->parsed()) {
    theory::TheoryId th = theory_from_name(ta_theory);
    if (th != theory::TheoryId::Dlo && th != theory::TheoryId::Ddlo) {
      throw input_error("transform alt expects dlo or ddlo");
    }
    theory::Formula phi = theory::parse_formula(ta_formula);
    theory::TheorySample s;
    s.theory = th;
    s.params.size = 2 * ta_length;
    s.params.seed = g.seed;
    // Pair tuples laid out so the sequence is indiscernible: ascending in
    // the first order and, for ddlo, descending in the second.
    for (int i = 0; i < ta_length; ++i) {
      for (int j = 0; j < 2; ++j) {
        theory::Point p;
        p.coords.push_back(4 * i + 2 * j);
        if (th == theory::TheoryId::Ddlo) {
          p.coords.push_back(4 * (ta_length - 1 - i) + 2 * j);
        }
        s.points.push_back(p);
      }
    }
    indisc::Sequence seq = block_sequence(s, 2);
    transforms::AltSearchResult r =
        transforms::alternation_search(phi, seq, g.dnf());
    std::ostringstream out;
    out << "max_alternations: " << r.max_alternations << "\n";
    out << "nodes: " << r.nodes << "\n";
    write_output(out.str(), g.out);
    return 0;
  }

  if (tinter->parsed()) {
    patterns::PatternSpec spec =
        patterns::load_pattern_json(read_file(ti_pattern));
    transforms::Interleaved il = transforms::pattern_to_interleaved(spec, g.dnf());
    std::ostringstream out;
    out << "k: " << il.k << "\n";
    out << "columns: " << il.columns.size() << "\n";
    out << "subsets_checked: " << il.subsets_checked.size() << "\n";
    out << "all_subsets_definable: " << (il.all_subsets_definable ? "yes" : "no")
        << "\n";
    write_output(out.str(), g.out);
    return il.all_subsets_definable ? 0 : 1;
  }

  if (sample_cmd->parsed()) {
    theory::TheoryId th = theory_from_name(sm_theory);
    bool tree =
        th == theory::TheoryId::Eqtree || th == theory::TheoryId::EqtreeRev;
    theory::TheorySample s =
        tree ? theory::sample(th, sm_size, g.seed, sm_levels, sm_branching)
             : theory::sample(th, sm_size, g.seed);
    write_output(theory::save_sample_json(s), g.out);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const dpkit::resource_error& e) {
    std::fprintf(stderr, "resource error: %s\n", e.what());
    return 3;
  } catch (const dpkit::io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const dpkit::input_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const dpkit::contract_error& e) {
    std::fprintf(stderr, "contract error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
