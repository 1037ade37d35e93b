// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [report.json]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chasm/analysis.hpp"
#include "chasm/depth4.hpp"
#include "chasm/generate.hpp"
#include "chasm/rng.hpp"
#include "chasm/tensor.hpp"
#include "chasm/vsbr.hpp"

using namespace chasm;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  json report = json::object();
};

struct Tally {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::vector<std::string> first;

  void expect(bool ok, const std::string& what) {
    ++cases;
    if (ok) return;
    ++failures;
    if (first.size() < 5) first.push_back(what);
  }
  void into(Outcome& o) const {
    o.report["cases"] = cases;
    o.report["failures"] = failures;
    if (!first.empty()) o.report["first_failures"] = first;
    o.pass = o.pass && failures == 0;
  }
};

std::string tag(const std::string& what, std::uint64_t seed) { return what + " seed=" + std::to_string(seed); }

// Shared corpus for criteria 1 and 2.
struct CorpusItem {
  std::uint64_t seed;
  std::size_t n;
  int d;
  std::size_t s;
  Circuit c;
};

std::vector<CorpusItem> general_corpus() {
  std::vector<CorpusItem> out;
  for (std::uint64_t i = 0; i < 200; ++i) {
    CounterStream r(2024, i, 1);
    std::size_t n = 2 + r.below(5);
    int d = 2 + static_cast<int>(r.below(11));
    std::size_t s = 40 + r.below(41);
    out.push_back({i, n, d, s, gen_random_homogeneous_circuit(i, n, d, s)});
  }
  return out;
}

Outcome criteria_1_2(Outcome& second) {
  Outcome first;
  Tally pit, exact, bounds;
  std::size_t exact_checked = 0, max_top = 0, max_iter_ratio_num = 0;
  double worst_fanin_slack = -1e300;
  std::size_t max_bad = 0;
  for (const auto& item : general_corpus()) {
    int tc = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(item.d))));
    for (int t : {tc, 4}) {
      t = std::min(t, item.d);
      PassResult pr = reduce_general(item.c, t, item.seed);
      std::string id = tag("n=" + std::to_string(item.n) + " d=" + std::to_string(item.d) + " t=" + std::to_string(t), item.seed);
      pit.expect(pit_equivalent(item.c, pr.circuit, 64, item.seed).equal, id);
      try {
        SparsePoly in = expand_to_sparse(item.c, 10'000);
        exact.expect(in == pr.circuit.expand(kDefaultMonomialCap), id);
        ++exact_checked;
      } catch (const CapExceeded&) {
      }
      const auto& rep = pr.report;
      bounds.expect(rep.max_bottom_degree <= t, "bottom degree " + id);
      bounds.expect(rep.iteration_count * static_cast<std::size_t>(t) <= 8 * static_cast<std::size_t>(item.d),
                    "iterations " + id);
      bounds.expect(rep.top_fanin_within_bound(), "top fan-in " + id);
      bounds.expect(pr.audit.monotonicity_violations == 0, "bad-term monotonicity " + id);
      bounds.expect(pr.audit.bad_cap_violations == 0, "bad-term cap " + id);
      max_top = std::max(max_top, rep.top_fanin);
      max_iter_ratio_num = std::max(max_iter_ratio_num, rep.iteration_count * static_cast<std::size_t>(t));
      worst_fanin_slack = std::max(worst_fanin_slack,
                                   std::log2(std::max<double>(1, static_cast<double>(rep.top_fanin))) -
                                       rep.bound_top_fanin_log2);
      max_bad = std::max(max_bad, pr.audit.max_bad);
    }
  }
  pit.into(first);
  exact.into(first);
  first.report["pit_failures"] = pit.failures;
  first.report["exact_checked"] = exact_checked;
  first.report["exact_failures"] = exact.failures;
  second = Outcome{};
  bounds.into(second);
  second.report["max_top_fanin"] = max_top;
  second.report["max_iterations_times_t"] = max_iter_ratio_num;
  second.report["max_log2_fanin_minus_bound"] = worst_fanin_slack;
  second.report["max_bad_terms"] = max_bad;
  return first;
}

Outcome criterion_3() {
  Outcome o;
  Tally t;
  int worst_depth = 0;
  double worst_ratio = 0;
  std::size_t max_fan = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    CounterStream r(3030, i, 1);
    std::size_t n = 2 + r.below(5);
    int d = 2 + static_cast<int>(r.below(15));
    std::size_t s = 40 + r.below(41);
    Circuit c = gen_random_homogeneous_formula(i, n, d, s);
    ReducedCircuit rc = vsbr_reduce(binarize_left_heavy(c));
    VsbrStats st = vsbr_stats(rc);
    const int lg = std::max(1, static_cast<int>(std::ceil(std::log2(d))));
    std::string id = tag("d=" + std::to_string(d), i);
    t.expect(st.max_mul_fanin <= 5, "fan-in " + id);
    t.expect(st.halving_violations == 0, "halving " + id);
    t.expect(st.depth <= kVsbrDepthConstant * lg, "depth " + id);
    t.expect(pit_equivalent(c, rc.circuit(), 64, i).equal, "pit " + id);
    worst_depth = std::max(worst_depth, st.depth);
    worst_ratio = std::max(worst_ratio, static_cast<double>(st.depth) / lg);
    max_fan = std::max(max_fan, st.max_mul_fanin);
  }
  t.into(o);
  o.report["depth_constant"] = kVsbrDepthConstant;
  o.report["max_depth"] = worst_depth;
  o.report["max_depth_over_log2d"] = worst_ratio;
  o.report["max_mul_fanin"] = max_fan;
  return o;
}

// Sum over HY rows as an evaluable.
Evaluable rows_evaluable(const Formula& f, const std::vector<HyRow>& rows) {
  auto ev = std::make_shared<FTreeEval>(f.field(), f.num_vars());
  Evaluable e;
  e.field = f.field();
  e.num_vars = f.num_vars();
  e.degree = f.degree();
  const PrimeField field = f.field();
  e.eval = [ev, rows, field](std::span<const u64> pt) {
    u64 sum = 0;
    for (const auto& r : rows) {
      u64 prod = 1;
      for (const auto& x : r.factors) prod = field.mul(prod, ev->evaluate(x.formula, pt));
      sum = field.add(sum, prod);
    }
    return sum;
  };
  return e;
}

Outcome criterion_4() {
  Outcome o;
  Tally t;
  std::size_t rows_total = 0, max_len = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    CounterStream r(4040, i, 1);
    const int ds[3] = {8, 12, 16};
    int d = ds[r.below(3)];
    std::size_t n = 2 + r.below(5);
    std::size_t s = 40 + r.below(41);
    Formula f(gen_random_homogeneous_formula(i, n, d, s));
    auto rows = hy_rows(f);
    std::string id = tag("d=" + std::to_string(d), i);
    for (const auto& row : rows) {
      t.expect(hy_windows_hold(row, d), "windows " + id);
      t.expect(static_cast<double>(row.factors.size()) <= hy_length_bound(d), "length " + id);
      max_len = std::max(max_len, row.factors.size());
    }
    rows_total += rows.size();
    t.expect(pit_equivalent(Evaluable::of(f.circuit()), rows_evaluable(f, rows), 64, i).equal, "pit " + id);
  }
  t.into(o);
  o.report["rows"] = rows_total;
  o.report["max_row_length"] = max_len;
  return o;
}

Outcome criterion_5() {
  Outcome o;
  Tally t;
  json cases = json::array();
  auto run = [&](const Circuit& c, int d, int tt, std::uint64_t seed, const std::string& family) {
    Formula f(c);
    PassResult a = reduce_hom_formula(f, tt, seed);
    PassResult b = reduce_hom_formula_alt(f, tt, seed);
    const std::size_t bound = hom_a_bound(d, tt);
    std::string id = tag(family, seed);
    for (const PassResult* pr : {&a, &b}) {
      const std::string p = pr->report.pass_name + " " + id;
      t.expect(pr->report.min_factor_count >= bound, "a_min " + p);
      t.expect(pr->audit.max_big_degree_drop <= 3 * tt, "degree drop " + p);
      t.expect(pr->audit.big_drop_violations == 0, "degree drop log " + p);
      t.expect(pr->report.iteration_count * static_cast<std::size_t>(tt) <= 9 * static_cast<std::size_t>(d),
               "iterations " + p);
      t.expect(pr->report.max_bottom_degree <= tt, "bottom degree " + p);
      t.expect(pit_equivalent(c, pr->circuit, 64, seed).equal, "pit " + p);
    }
    t.expect(pit_equivalent(a.circuit, b.circuit, 64, seed + 1).equal, "hom vs alt " + id);
    cases.push_back({{"family", family},
                     {"seed", seed},
                     {"a_bound", bound},
                     {"a_min_hom", a.report.min_factor_count},
                     {"a_min_alt", b.report.min_factor_count},
                     {"top_fanin_hom", a.report.top_fanin},
                     {"top_fanin_alt", b.report.top_fanin},
                     {"max_drop_hom", a.audit.max_big_degree_drop},
                     {"max_drop_alt", b.audit.max_big_degree_drop},
                     {"iterations_hom", a.report.iteration_count},
                     {"iterations_alt", b.report.iteration_count}});
  };
  for (std::uint64_t i = 0; i < 5; ++i) run(gen_balanced_product(i, 4, 64), 64, 8, i, "balanced-product d=64 t=8");
  for (std::uint64_t i = 0; i < 20; ++i) {
    run(gen_random_homogeneous_formula(i, 4, 12, 80), 12, 4, i, "random formula d=12 t=4");
  }
  t.into(o);
  o.report["runs"] = cases;
  return o;
}

Outcome criterion_6() {
  Outcome o;
  Tally t;
  json cases = json::array();
  for (int delta : {1, 2}) {
    for (int d : {8, 16}) {
      const int tt = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
      for (std::uint64_t i = 0; i < 5; ++i) {
        Circuit c = gen_shallow(i, 4, d, delta);
        Formula f(c);
        std::string id = tag("delta=" + std::to_string(delta) + " d=" + std::to_string(d), i);
        auto rows = shallow_rows(f, delta);
        std::size_t min_l = static_cast<std::size_t>(-1);
        for (const auto& r : rows) {
          std::size_t l = 0;
          for (const auto& x : r.split_factors) l += x.degree >= 1 ? 1 : 0;
          min_l = std::min(min_l, l);
        }
        t.expect(min_l >= shallow_min_split(d, delta), "split length " + id);
        t.expect(rows.size() <= f.size() * f.size(), "row count " + id);
        PassResult pr = reduce_shallow(f, tt, i);
        const double bound = shallow_a_bound(d, tt, delta);
        t.expect(static_cast<double>(pr.report.min_factor_count) >= bound, "a_min " + id);
        t.expect(pr.report.max_bottom_degree <= tt, "bottom degree " + id);
        t.expect(pit_equivalent(c, pr.circuit, 64, i).equal, "pit " + id);
        cases.push_back({{"delta", delta},
                         {"d", d},
                         {"t", tt},
                         {"seed", i},
                         {"rows", rows.size()},
                         {"min_split", min_l},
                         {"required_split", shallow_min_split(d, delta)},
                         {"a_min", pr.report.min_factor_count},
                         {"a_bound", bound}});
      }
    }
  }
  t.into(o);
  o.report["c_delta"] = kShallowConstant;
  o.report["runs"] = cases;
  return o;
}

Outcome criterion_7() {
  Outcome o;
  std::size_t max_rank = 0;
  std::vector<std::size_t> hist(5, 0);
  for (unsigned bits = 0; bits < 256; ++bits) {
    Tensor t(PrimeField(2), Partition::uniform(3, 2));
    for (unsigned cell = 0; cell < 8; ++cell) {
      if (bits >> cell & 1) t.set({cell >> 2 & 1u, cell >> 1 & 1u, cell & 1u}, 1);
    }
    std::size_t r = brute_force_rank(t, 2);
    max_rank = std::max(max_rank, r);
    ++hist[std::min<std::size_t>(r, 4)];
  }
  o.pass = max_rank == 3;
  o.report["max_rank"] = max_rank;
  o.report["rank_histogram"] = hist;
  return o;
}

Outcome criterion_8() {
  Outcome o;
  Tally t;
  std::size_t max_terms = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    CounterStream r(8080, i, 1);
    const std::size_t order = 2 + r.below(2);
    std::vector<std::size_t> shape;
    std::size_t prod = 1, mx = 0;
    for (std::size_t j = 0; j < order; ++j) {
      shape.push_back(1 + r.below(3));
      prod *= shape.back();
      mx = std::max(mx, shape.back());
    }
    Tensor tn = gen_random_tensor(i, shape, PrimeField(101));
    RankDecomposition rd = trivial_decomposition(tn);
    t.expect(rd.size() * mx <= prod, tag("term count", i));
    t.expect(rd.verify(), tag("re-sum", i));
    max_terms = std::max(max_terms, rd.size());
  }
  PrimeField f5(5);
  std::vector<std::size_t> ranks(5, 0);
  for (std::uint64_t i = 0; i < 50; ++i) {
    Tensor tn = gen_random_tensor(1000 + i, {4, 4}, f5);
    std::vector<std::vector<u64>> m(4, std::vector<u64>(4, 0));
    for (const auto& [idx, c] : tn.coeffs()) m[idx[0]][idx[1]] = c;
    std::size_t rk = matrix_rank(m, f5);
    RankDecomposition pr = prune(trivial_decomposition(tn));
    t.expect(pr.size() == rk, tag("4x4 prune vs row reduction", i));
    t.expect(pr.verify(), tag("4x4 prune re-sum", i));
    ++ranks[rk];
  }
  // Brute force joins the comparison where the search is affordable.
  for (std::uint64_t i = 0; i < 50; ++i) {
    Tensor tn = gen_random_tensor(2000 + i, {2, 2}, f5);
    std::vector<std::vector<u64>> m(2, std::vector<u64>(2, 0));
    for (const auto& [idx, c] : tn.coeffs()) m[idx[0]][idx[1]] = c;
    t.expect(brute_force_rank(tn, 5) == matrix_rank(m, f5), tag("2x2 brute force vs row reduction", i));
  }
  t.into(o);
  o.report["max_trivial_terms"] = max_terms;
  o.report["rank_histogram_4x4"] = ranks;
  return o;
}

Outcome criterion_9() {
  Outcome o;
  Tally t;
  json sml_runs = json::array();
  for (std::uint64_t i = 0; i < 20; ++i) {
    const int d = 3 + static_cast<int>(i % 2);
    Formula f(gen_random_sml_formula(i, 2, d, 40));
    Partition part = Partition::uniform(static_cast<std::size_t>(d), 2);
    RankCertificate rc = rank_certificate(f, part, 0.05, CertMode::Sml, i);
    const std::string id = tag("sml d=" + std::to_string(d), i);
    t.expect(poly_of(rc.decomposition.resum(), f.num_vars()) == expand_to_sparse(f.circuit()), "re-sum " + id);
    const double bound = rc.report["s_prime"].get<double>() *
                         std::pow(2.0, d - rc.report["a_min"].get<double>());
    t.expect(static_cast<double>(rc.decomposition.size()) <= bound, "term count " + id);
    sml_runs.push_back({{"seed", i}, {"d", d}, {"terms", rc.decomposition.size()}, {"bound", bound},
                        {"t", rc.report["t"]}, {"a_min", rc.report["a_min"]}});
  }
  json hom_runs = json::array();
  std::size_t found = 0;
  for (std::uint64_t i = 0; found < 10 && i < 200; ++i) {
    const int d = 3 + static_cast<int>(found % 2);
    const std::size_t nv = 2 * static_cast<std::size_t>(d);
    Circuit c = i % 2 == 0 ? gen_balanced_product(i, nv, d) : gen_random_homogeneous_formula(i, nv, d, 40);
    Partition part = Partition::uniform(static_cast<std::size_t>(d), 2);
    if (check_set_multilinear(c, part)) continue;
    const SparsePoly want = sml_restriction(expand_to_sparse(c), part);
    if (want.is_zero()) continue;
    ++found;
    Formula f(c);
    RankCertificate rc = rank_certificate(f, part, 0.05, CertMode::Homogeneous, i);
    const std::string id = tag("hom d=" + std::to_string(d), i);
    t.expect(poly_of(rc.decomposition.resum(), f.num_vars()) == want, "re-sum " + id);
    t.expect(rc.report["multinomial_violations"].get<std::size_t>() == 0, "multinomial " + id);
    // Independent recount of the row bound on the chosen depth-four circuit.
    hom_runs.push_back({{"seed", i}, {"d", d}, {"terms", rc.decomposition.size()}, {"rows", rc.report["rows"]},
                        {"t", rc.report["t"]}});
  }
  t.expect(found == 10, "not enough non-set-multilinear formulas");
  // Row counts of sml_of_summand against the multinomial bound, summand by summand.
  for (std::uint64_t i = 0; i < 10; ++i) {
    Formula f(gen_random_homogeneous_formula(i, 8, 4, 40));
    PassResult pr = reduce_hom_formula(f, 2, i);
    for (const auto& s : pr.circuit.summands()) {
      SmlSplit sp = sml_of_summand(s, Partition::uniform(4, 2));
      t.expect(static_cast<double>(sp.rows.size()) <= sp.multinomial_bound + 1e-9, tag("multinomial", i));
      t.expect(sp.rows.size() <= sp.admissible, tag("admissible", i));
    }
  }
  t.into(o);
  o.report["sml"] = sml_runs;
  o.report["hom"] = hom_runs;
  return o;
}

struct Criterion {
  int id;
  std::string name;
};

json run_suite(std::vector<std::pair<Criterion, Outcome>>& results, std::vector<double>& secs) {
  using clock = std::chrono::steady_clock;
  results.clear();
  secs.clear();
  auto timed = [&](const Criterion& c, const std::function<Outcome()>& fn) {
    auto t0 = clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.report["exception"] = e.what();
    }
    secs.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    results.emplace_back(c, std::move(o));
  };
  Outcome c2;
  timed({1, "identity preservation, general pass"}, [&] { return criteria_1_2(c2); });
  // Criterion 2 reuses the runs of criterion 1; its time is included there.
  secs.push_back(0);
  results.emplace_back(Criterion{2, "structural bounds, general pass"}, c2);
  timed({3, "log-depth rewrite invariants"}, criterion_3);
  timed({4, "HY degree windows"}, criterion_4);
  timed({5, "structured bound, formula passes"}, criterion_5);
  timed({6, "shallow-formula bound"}, criterion_6);
  timed({7, "2x2x2 tensors over F2 have rank at most 3"}, criterion_7);
  timed({8, "trivial rank bound and matrix case"}, criterion_8);
  timed({9, "rank certificate pipeline"}, criterion_9);
  json all = json::object();
  for (const auto& [c, o] : results) {
    json j = o.report;
    j["pass"] = o.pass;
    all[std::to_string(c.id)] = j;
  }
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::pair<Criterion, Outcome>> results;
  std::vector<double> secs;
  json first = run_suite(results, secs);
  const double limits[] = {60, 0, 0, 0, 0, 0, 30, 0, 0};
  bool all_ok = true;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& [c, o] = results[k];
    bool ok = o.pass && (limits[k] == 0 || secs[k] < limits[k]);
    all_ok = all_ok && ok;
    std::printf("%s %2d %s (%.2f s)\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(), secs[k]);
    if (!ok) std::printf("     %s\n", o.report.dump().substr(0, 600).c_str());
  }

  std::vector<std::pair<Criterion, Outcome>> again;
  std::vector<double> secs2;
  json second = run_suite(again, secs2);
  const std::string a = dump_report(first), b = dump_report(second);
  const bool same = a == b;
  all_ok = all_ok && same;
  std::printf("%s %2d %s (%zu bytes)\n", same ? "PASS" : "FAIL", 10, "byte-identical reports on rerun", a.size());

  if (argc > 1) {
    std::ofstream out(argv[1], std::ios::binary);
    out << a;
  }
  return all_ok ? 0 : 1;
}
