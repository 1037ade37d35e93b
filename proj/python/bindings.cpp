// Thin text-in/text-out layer; structured results cross as JSON strings and
// are decoded in chasm/__init__.py.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "chasm/analysis.hpp"
#include "chasm/depth4.hpp"
#include "chasm/generate.hpp"
#include "chasm/tensor.hpp"
#include "chasm/vsbr.hpp"

namespace py = pybind11;
using namespace chasm;
using nlohmann::json;

namespace {

bool is_depth4_text(const std::string& text) { return text.rfind("depth4", 0) == 0; }

Evaluable evaluable_of(const std::string& text) {
  if (is_depth4_text(text)) return Evaluable::of(DepthFourCircuit::parse(text));
  return Evaluable::of(parse_circuit(text));
}

std::string generate(const std::string& family, std::uint64_t seed, std::size_t n, int d, std::size_t s,
                     int delta, bool dag, u64 p, std::size_t width, const std::vector<std::size_t>& shape) {
  GeneratorParams g;
  g.family = family;
  g.seed = seed;
  g.n = n;
  g.d = d;
  g.s = s;
  g.delta = delta;
  g.dag = dag;
  g.p = p;
  g.width = width;
  g.shape = shape;
  if (family == "random-tensor") return gen_random_tensor(seed, shape, PrimeField(p)).serialize();
  return serialize(generate_circuit(g));
}

std::string circuit_info(const std::string& text) {
  Circuit c = parse_circuit(text);
  json j{{"size", c.size()},
         {"degree", c.degree()},
         {"num_vars", c.num_vars()},
         {"p", c.field().modulus()},
         {"is_tree", c.is_tree()},
         {"homogeneous", static_cast<bool>(check_homogeneous(c))}};
  if (c.is_tree()) j["product_depth"] = product_depth(Formula(c));
  return j.dump();
}

std::pair<std::string, std::string> depth4(const std::string& text, int t, const std::string& pass,
                                           std::uint64_t seed) {
  Circuit c = parse_circuit(text);
  PassResult pr;
  if (pass == "general") {
    pr = reduce_general(c, t, seed);
  } else {
    Formula f(c);
    if (pass == "hom") pr = reduce_hom_formula(f, t, seed);
    else if (pass == "hom-alt") pr = reduce_hom_formula_alt(f, t, seed);
    else if (pass == "shallow") pr = reduce_shallow(f, t, seed);
    else throw PreconditionError("unknown pass '" + pass + "'");
  }
  json rep = pr.report.to_json();
  rep["audit"] = pr.audit.to_json();
  return {pr.circuit.serialize(), rep.dump()};
}

std::string verify(const std::string& a, const std::string& b, std::size_t trials, std::uint64_t seed) {
  PitVerdict v = pit_equivalent(evaluable_of(a), evaluable_of(b), trials, seed);
  json j{{"verdict", v.equal ? "equal" : "different"},
         {"trials", v.trials},
         {"seed", seed},
         {"failure_bound_log2", v.failure_bound_log2}};
  if (v.witness) {
    j["witness"] = *v.witness;
    j["value_a"] = v.value_a;
    j["value_b"] = v.value_b;
  }
  return j.dump();
}

std::pair<std::string, std::string> vsbr(const std::string& text) {
  Circuit c = parse_circuit(text);
  ReducedCircuit rc = vsbr_reduce(binarize_left_heavy(c));
  VsbrStats st = vsbr_stats(rc);
  const int d = c.degree();
  json j{{"size", st.size},
         {"depth", st.depth},
         {"depth_bound", kVsbrDepthConstant * std::max(1, static_cast<int>(std::ceil(std::log2(std::max(d, 1)))))},
         {"degree", st.degree},
         {"max_mul_fanin", st.max_mul_fanin},
         {"halving_violations", st.halving_violations},
         {"max_rows", st.max_rows},
         {"quotient_count", st.quotient_count}};
  return {rc.serialize(), j.dump()};
}

std::pair<std::string, std::string> rank_cert(const std::string& text, const std::string& mode, double c,
                                              std::size_t block, std::uint64_t seed) {
  Formula f(parse_circuit(text));
  const std::size_t d = static_cast<std::size_t>(f.degree());
  if (block == 0) {
    if (d == 0 || f.num_vars() % d != 0) throw PreconditionError("variable count is not a multiple of the degree");
    block = f.num_vars() / d;
  }
  if (mode != "sml" && mode != "hom") throw PreconditionError("mode must be sml or hom");
  RankCertificate rc =
      rank_certificate(f, Partition::uniform(d, block), c, mode == "sml" ? CertMode::Sml : CertMode::Homogeneous, seed);
  return {rc.decomposition.serialize(), rc.report.dump()};
}

std::size_t brute_rank(const std::string& text, u64 q, std::size_t budget) {
  Tensor t = Tensor::parse(text);
  return brute_force_rank(t, q == 0 ? t.field().modulus() : q, budget);
}

}  // namespace

PYBIND11_MODULE(_chasm, m) {
  m.doc() = "Depth reduction of arithmetic circuits";

  auto base = py::register_exception<Error>(m, "ChasmError", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<CapExceeded>(m, "CapExceeded", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  m.def("generate", &generate, py::arg("family"), py::arg("seed") = 0, py::arg("n") = 4, py::arg("d") = 8,
        py::arg("s") = 60, py::arg("delta") = 2, py::arg("dag") = false, py::arg("p") = kMersenne61,
        py::arg("width") = 2, py::arg("shape") = std::vector<std::size_t>{2, 2, 2});
  m.def("circuit_info", &circuit_info, py::arg("text"));
  m.def("depth4", &depth4, py::arg("text"), py::arg("t"), py::arg("pass_name") = "general", py::arg("seed") = 0);
  m.def("verify", &verify, py::arg("a"), py::arg("b"), py::arg("trials") = 32, py::arg("seed") = 0);
  m.def("vsbr", &vsbr, py::arg("text"));
  m.def("rank_certificate", &rank_cert, py::arg("text"), py::arg("mode") = "sml", py::arg("c") = 0.05,
        py::arg("block") = 0, py::arg("seed") = 0);
  m.def("brute_force_rank", &brute_rank, py::arg("text"), py::arg("q") = 0, py::arg("budget") = 200'000'000);
  m.attr("SHALLOW_CONSTANT") = kShallowConstant;
  m.attr("VSBR_DEPTH_CONSTANT") = kVsbrDepthConstant;
}
