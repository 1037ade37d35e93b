#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chasm/analysis.hpp"
#include "chasm/depth4.hpp"
#include "chasm/generate.hpp"
#include "chasm/tensor.hpp"
#include "chasm/vsbr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace chasm;

namespace {

// Thrown when an asserted invariant fails; mapped to exit status 1.
class InvariantFailure : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// "dir/f.ac" + ".d4" -> "dir/f.d4"
fs::path sibling(const std::string& input, const std::string& suffix) {
  fs::path p(input);
  return p.parent_path() / (p.stem().string() + suffix);
}

std::string first_word(const std::string& text) {
  std::istringstream in(text);
  std::string line, w;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    if (ls >> w && w[0] != '#') return w;
  }
  return {};
}

std::vector<std::size_t> parse_shape(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, 'x')) out.push_back(std::stoul(part));
  if (out.empty()) throw PreconditionError("empty shape");
  return out;
}

// Collects failed assertions; the subcommand throws once all are recorded.
struct Checks {
  json list = json::object();
  std::vector<std::string> failed;

  void expect(const std::string& name, bool ok) {
    list[name] = ok;
    if (!ok) failed.push_back(name);
  }
  void finish() const {
    if (failed.empty()) return;
    std::string msg = "invariant failed:";
    for (const auto& f : failed) msg += " " + f;
    throw InvariantFailure(msg);
  }
};

// ---------------------------------------------------------------------------

struct GenOpts {
  GeneratorParams p;
  std::string shape;
  std::string out;
};

void cmd_gen(const GenOpts& o) {
  std::string text;
  if (o.p.family == "random-tensor") {
    text = gen_random_tensor(o.p.seed, parse_shape(o.shape), PrimeField(o.p.p)).serialize();
  } else {
    text = serialize(generate_circuit(o.p));
  }
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
  } else {
    write_file(o.out, text);
  }
}

struct HomOpts {
  std::string input, out;
  int component = -1;
  std::size_t trials = 16;
  std::uint64_t seed = 0;
};

void cmd_homogenize(const HomOpts& o) {
  Circuit c = parse_circuit(read_file(o.input));
  Checks chk;
  json rep;
  rep["input_size"] = c.size();
  rep["degree"] = c.degree();
  Circuit out;
  if (o.component >= 0) {
    out = homogenize_component(c, o.component);
    rep["component"] = o.component;
    chk.expect("homogeneous", static_cast<bool>(check_homogeneous(out)));
  } else {
    Homogenized h = homogenize(c);
    json present = json::array();
    for (std::size_t k = 0; k < h.components.size(); ++k) {
      if (h.components[k]) present.push_back(k);
    }
    rep["components"] = present;
    out = std::move(h.circuit);
    chk.expect("pit_equal", pit_equivalent(c, out, o.trials, o.seed).equal);
  }
  rep["output_size"] = out.size();
  rep["checks"] = chk.list;
  fs::path dst = o.out.empty() ? sibling(o.input, ".hom.ac") : fs::path(o.out);
  write_file(dst, serialize(out));
  write_file(sibling(dst.string(), ".report.json"), dump_report(rep));
  chk.finish();
}

struct VsbrOpts {
  std::string input, out;
  std::size_t trials = 16;
  std::uint64_t seed = 0;
};

void cmd_vsbr(const VsbrOpts& o) {
  Circuit c = parse_circuit(read_file(o.input));
  ReducedCircuit rc = vsbr_reduce(binarize_left_heavy(c));
  VsbrStats st = vsbr_stats(rc);
  const int d = c.degree();
  const int depth_bound = kVsbrDepthConstant * std::max(1, static_cast<int>(std::ceil(std::log2(std::max(d, 1)))));
  Checks chk;
  chk.expect("mul_fanin_le_5", st.max_mul_fanin <= 5);
  chk.expect("children_halve_degree", st.halving_violations == 0);
  chk.expect("depth_within_bound", st.depth <= depth_bound);
  chk.expect("pit_equal", pit_equivalent(c, rc.circuit(), o.trials, o.seed).equal);
  json rep{{"input_size", c.size()},   {"degree", d},
           {"size", st.size},          {"depth", st.depth},
           {"depth_bound", depth_bound}, {"depth_constant", kVsbrDepthConstant},
           {"max_mul_fanin", st.max_mul_fanin}, {"halving_violations", st.halving_violations},
           {"max_rows", st.max_rows},  {"quotient_count", st.quotient_count},
           {"checks", chk.list}};
  fs::path dst = o.out.empty() ? sibling(o.input, ".vsbr.ac") : fs::path(o.out);
  write_file(dst, rc.serialize());
  write_file(sibling(dst.string(), ".report.json"), dump_report(rep));
  chk.finish();
}

struct D4Opts {
  std::string input, out, pass = "general";
  int t = 0;
  std::size_t trials = 16;
  std::uint64_t seed = 0;
};

void cmd_depth4(const D4Opts& o) {
  Circuit c = parse_circuit(read_file(o.input));
  PassResult pr;
  if (o.pass == "general") {
    pr = reduce_general(c, o.t, o.seed);
  } else {
    Formula f(c);
    if (o.pass == "hom") pr = reduce_hom_formula(f, o.t, o.seed);
    else if (o.pass == "hom-alt") pr = reduce_hom_formula_alt(f, o.t, o.seed);
    else pr = reduce_shallow(f, o.t, o.seed);
  }
  Checks chk;
  auto bad = pr.circuit.validate();
  chk.expect("well_formed", !bad.has_value());
  chk.expect("bottom_degree_le_t", pr.report.max_bottom_degree <= o.t);
  chk.expect("top_fanin_within_bound", pr.report.top_fanin_within_bound());
  chk.expect("bad_terms_monotone", pr.audit.monotonicity_violations == 0);
  chk.expect("bad_terms_capped", pr.audit.bad_cap_violations == 0);
  chk.expect("big_degree_drop", pr.audit.big_drop_violations == 0);
  chk.expect("pit_equal", pit_equivalent(c, pr.circuit, o.trials, o.seed).equal);
  json rep = pr.report.to_json();
  rep["checks"] = chk.list;
  if (bad) rep["validation_error"] = *bad;
  fs::path dst = o.out.empty() ? sibling(o.input, ".d4") : fs::path(o.out);
  write_file(dst, pr.circuit.serialize());
  write_file(sibling(dst.string(), ".report.json"), dump_report(rep));
  chk.finish();
}

struct VerifyOpts {
  std::string input, against, report;
  std::size_t trials = 32;
  std::uint64_t seed = 0;
};

Evaluable load_evaluable(const std::string& path, std::vector<Circuit>& keep_c,
                         std::vector<DepthFourCircuit>& keep_d) {
  std::string text = read_file(path);
  std::string head = first_word(text);
  if (head == "depth4") {
    keep_d.push_back(DepthFourCircuit::parse(text));
    return Evaluable::of(keep_d.back());
  }
  if (head == "circuit") {
    keep_c.push_back(parse_circuit(text));
    return Evaluable::of(keep_c.back());
  }
  throw PreconditionError(path + ": neither a circuit nor a depth4 file");
}

void cmd_verify(const VerifyOpts& o) {
  std::vector<Circuit> cs;
  std::vector<DepthFourCircuit> ds;
  cs.reserve(2);
  ds.reserve(2);
  Evaluable a = load_evaluable(o.input, cs, ds);
  Evaluable b = load_evaluable(o.against, cs, ds);
  PitVerdict v = pit_equivalent(a, b, o.trials, o.seed);
  json rep{{"verdict", v.equal ? "equal" : "different"},
           {"trials", v.trials},
           {"seed", o.seed},
           {"failure_bound_log2", v.failure_bound_log2}};
  if (v.witness) {
    rep["witness"] = *v.witness;
    rep["value_a"] = v.value_a;
    rep["value_b"] = v.value_b;
  }
  std::string text = dump_report(rep);
  if (o.report.empty()) std::cout << text;
  else write_file(o.report, text);
  if (!v.equal) throw InvariantFailure("polynomials differ");
}

struct CertOpts {
  std::string input, out, mode = "sml";
  double c = 0.05;
  std::size_t block = 0;
  std::uint64_t seed = 0;
};

void cmd_rank_cert(const CertOpts& o) {
  Formula f(parse_circuit(read_file(o.input)));
  const std::size_t d = static_cast<std::size_t>(f.degree());
  std::size_t block = o.block;
  if (block == 0) {
    if (d == 0 || f.num_vars() % d != 0) {
      throw PreconditionError("variable count is not a multiple of the degree; pass --block");
    }
    block = f.num_vars() / d;
  }
  Partition part = Partition::uniform(d, block);
  RankCertificate rc =
      rank_certificate(f, part, o.c, o.mode == "sml" ? CertMode::Sml : CertMode::Homogeneous, o.seed);
  Checks chk;
  chk.expect("exact", rc.report.at("exact").get<bool>());
  chk.expect("term_count_within_bound", rc.report.at("term_count_within_bound").get<bool>());
  if (o.mode == "hom") chk.expect("multinomial", rc.report.at("multinomial_violations").get<std::size_t>() == 0);
  rc.report["checks"] = chk.list;
  fs::path dst = o.out.empty() ? sibling(o.input, ".cert") : fs::path(o.out);
  write_file(dst, rc.decomposition.serialize());
  write_file(dst.parent_path() / (dst.filename().string() + ".json"), dump_report(rc.report));
  chk.finish();
}

struct BruteOpts {
  std::string input, report;
  u64 q = 0;
  std::size_t budget = 200'000'000;
};

void cmd_brute_rank(const BruteOpts& o) {
  Tensor t = Tensor::parse(read_file(o.input));
  const u64 q = o.q ? o.q : t.field().modulus();
  std::size_t r = brute_force_rank(t, q, o.budget);
  RankDecomposition triv = prune(trivial_decomposition(t));
  json shape = t.shape();
  json rep{{"q", q}, {"shape", shape}, {"rank", r}, {"trivial_after_prune", triv.size()}};
  Checks chk;
  chk.expect("rank_le_trivial", r <= triv.size());
  rep["checks"] = chk.list;
  std::string text = dump_report(rep);
  if (o.report.empty()) std::cout << text;
  else write_file(o.report, text);
  chk.finish();
}

struct ReportOpts {
  std::vector<std::string> inputs;
  std::string out;
};

void cmd_report(const ReportOpts& o) {
  json all = json::array();
  for (const auto& path : o.inputs) {
    DepthFourCircuit d4 = DepthFourCircuit::parse(read_file(path));
    PassMeta meta;
    meta.pass_name = "depth4";
    meta.degree = d4.d();
    meta.cut = d4.t();
    json j = structure_report(d4, meta).to_json();
    j["file"] = fs::path(path).filename().string();
    all.push_back(std::move(j));
  }
  std::string text = dump_report(all);
  if (o.out.empty()) std::cout << text;
  else write_file(o.out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth reduction of arithmetic circuits"};
  app.require_subcommand(1);

  GenOpts gen;
  auto* g = app.add_subcommand("gen", "Generate a seeded circuit or tensor");
  g->add_option("--family", gen.p.family, "Generator family")
      ->required()
      ->check(CLI::IsMember({"random-homogeneous-formula", "balanced-product", "shallow", "imm", "random-tensor",
                             "random-sml-formula"}));
  g->add_option("--seed", gen.p.seed);
  g->add_option("--n", gen.p.n, "Variable count")->check(CLI::PositiveNumber);
  g->add_option("--d", gen.p.d, "Degree")->check(CLI::PositiveNumber);
  g->add_option("--s", gen.p.s, "Size budget")->check(CLI::PositiveNumber);
  g->add_option("--delta", gen.p.delta, "Product depth for the shallow family")->check(CLI::PositiveNumber);
  g->add_option("--width", gen.p.width, "Matrix width for imm")->check(CLI::PositiveNumber);
  g->add_option("--p", gen.p.p, "Field modulus");
  g->add_option("--shape", gen.shape, "Tensor shape, e.g. 3x3x3")->default_val("2x2x2");
  g->add_flag("--dag", gen.p.dag, "Share gates (circuit instead of formula)");
  g->add_option("-o,--out", gen.out, "Output file (stdout by default)");

  HomOpts hom;
  auto* h = app.add_subcommand("homogenize", "Split a circuit into homogeneous components");
  h->add_option("input", hom.input)->required()->check(CLI::ExistingFile);
  h->add_option("--component", hom.component, "Keep only this degree")->check(CLI::NonNegativeNumber);
  h->add_option("-o,--out", hom.out);
  h->add_option("--trials", hom.trials)->check(CLI::PositiveNumber);
  h->add_option("--seed", hom.seed);

  VsbrOpts vs;
  auto* v = app.add_subcommand("vsbr", "Log-depth rewrite of a homogeneous circuit");
  v->add_option("input", vs.input)->required()->check(CLI::ExistingFile);
  v->add_option("-o,--out", vs.out);
  v->add_option("--trials", vs.trials)->check(CLI::PositiveNumber);
  v->add_option("--seed", vs.seed);

  D4Opts d4;
  auto* dd = app.add_subcommand("depth4", "Reduce to a depth-four circuit");
  dd->add_option("input", d4.input)->required()->check(CLI::ExistingFile);
  dd->add_option("--t", d4.t, "Bottom degree cut")->required()->check(CLI::PositiveNumber);
  dd->add_option("--pass", d4.pass)->check(CLI::IsMember({"general", "hom", "hom-alt", "shallow"}));
  dd->add_option("-o,--out", d4.out);
  dd->add_option("--trials", d4.trials)->check(CLI::PositiveNumber);
  dd->add_option("--seed", d4.seed);

  VerifyOpts ver;
  auto* vf = app.add_subcommand("verify", "Randomized identity test between two files");
  vf->add_option("input", ver.input)->required()->check(CLI::ExistingFile);
  vf->add_option("--against", ver.against)->required()->check(CLI::ExistingFile);
  vf->add_option("--trials", ver.trials)->check(CLI::PositiveNumber);
  vf->add_option("--seed", ver.seed);
  vf->add_option("--report", ver.report, "Write the verdict here instead of stdout");

  auto* tn = app.add_subcommand("tensor", "Tensor rank tools");
  tn->require_subcommand(1);
  CertOpts cert;
  auto* rcmd = tn->add_subcommand("rank-cert", "Rank certificate through depth reduction");
  rcmd->add_option("input", cert.input)->required()->check(CLI::ExistingFile);
  rcmd->add_option("--mode", cert.mode)->check(CLI::IsMember({"sml", "hom"}));
  rcmd->add_option("--c", cert.c, "Size exponent")->check(CLI::PositiveNumber);
  rcmd->add_option("--block", cert.block, "Block size (default: nvars / degree)");
  rcmd->add_option("-o,--out", cert.out);
  rcmd->add_option("--seed", cert.seed);
  BruteOpts brute;
  auto* bcmd = tn->add_subcommand("brute-rank", "Exact rank by exhaustive search");
  bcmd->add_option("input", brute.input)->required()->check(CLI::ExistingFile);
  bcmd->add_option("--q", brute.q, "Field size (default: the tensor's modulus)");
  bcmd->add_option("--budget", brute.budget);
  bcmd->add_option("--report", brute.report);

  ReportOpts rep;
  auto* rp = app.add_subcommand("report", "Structure reports for depth-four files");
  rp->add_option("inputs", rep.inputs)->required()->check(CLI::ExistingFile);
  rp->add_option("-o,--out", rep.out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) cmd_gen(gen);
    else if (*h) cmd_homogenize(hom);
    else if (*v) cmd_vsbr(vs);
    else if (*dd) cmd_depth4(d4);
    else if (*vf) cmd_verify(ver);
    else if (*rcmd) cmd_rank_cert(cert);
    else if (*bcmd) cmd_brute_rank(brute);
    else if (*rp) cmd_report(rep);
  } catch (const InvariantFailure& e) {
    std::cerr << "chasm: " << e.what() << "\n";
    return 1;
  } catch (const PreconditionError& e) {
    std::cerr << "chasm: precondition: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "chasm: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
