#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sentinel/common/keccak.hpp"
#include "sentinel/evm/disassembler.hpp"
#include "sentinel/evm/lift.hpp"
#include "sentinel/evm/opcodes.hpp"
#include "sentinel/features/features.hpp"
#include "sentinel/fundsource/trace.hpp"
#include "sentinel/ml/adasyn.hpp"
#include "sentinel/ml/ensemble.hpp"
#include "sentinel/ml/metrics.hpp"
#include "sentinel/ml/splits.hpp"
#include "sentinel/pipeline/analyzer.hpp"
#include "sentinel/pipeline/dataset.hpp"
#include "sentinel/pipeline/synthetic.hpp"
#include "sentinel/pscft/pscft.hpp"

namespace py = pybind11;
using namespace sentinel;

namespace {

Bytes as_bytes(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

py::bytes to_py(std::span<const std::uint8_t> b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

// bytecode-only analysis: no network, optional bundle and signature list
std::string analyze(const py::bytes& code, const std::string& model_dir, const std::string& signature_db) {
  pipeline::PipelineConfig c;
  c.model = model_dir;
  c.signature_db = signature_db;
  c.remote_signatures = false;
  pipeline::Analyzer a(c);
  return a.analyze_bytecode(as_bytes(code), "bytecode").to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "sentinel core: EVM lifting, PSCFT, features, fund tracing and the detection ensemble";

  m.def("keccak256", [](const py::bytes& b) { return to_py(keccak256(as_bytes(b)).bytes); });
  m.def("selector", [](const std::string& sig) { return selector_of(sig).hex(); });

  m.def("disassemble", [](const py::bytes& code) {
    py::list out;
    for (const auto& ins : evm::disassemble(as_bytes(code)))
      out.append(py::make_tuple(ins.offset, std::string(evm::opcode_info(ins.opcode).name),
                                ins.push_operand.empty() ? py::object(py::none()) : py::object(py::str(to_hex(ins.push_operand)))));
    return out;
  });
  m.def("assemble", [](const std::string& src) { return to_py(evm::assemble_text(src)); });
  m.def("runtime_code", [](const py::bytes& creation) {
    const auto s = evm::extract_runtime_code(as_bytes(creation));
    return py::make_tuple(to_py(s.runtime), s.split);
  });

  m.def(
      "pscft",
      [](const py::bytes& code, const std::string& signatures) {
        const auto ir = evm::lift(as_bytes(code));
        auto db = pscft::LocalSignatureDB::parse(signatures);
        return pscft::build_pscft(ir, &db, nullptr).text;
      },
      py::arg("code"), py::arg("signatures") = "");
  m.def("tokenize", [](const std::string& text) { return pscft::tokenize(text); });
  m.def("implementation_features", [](const py::bytes& code) {
    const auto f = features::extract_implementation_features(evm::lift(as_bytes(code)), features::FeatureConfig::defaults());
    features::FeatureRecord r;
    r.implementation = f;
    return pipeline::record_to_json(r).at("implementation").dump();
  });

  m.def(
      "trace_fund_source",
      [](const std::string& graph, const std::string& labels, const std::string& deployer, std::size_t max_depth) {
        auto g = fundsource::FixtureFundingGraph::parse(graph);
        const auto db = fundsource::AddressLabelDB::parse(labels);
        const auto t = fundsource::trace_fund_source(Address::from_hex(deployer), g, db, max_depth);
        return py::make_tuple(std::string(fundsource::category_name(t.category)), t.hops,
                              std::string(fundsource::trace_stop_name(t.stop)));
      },
      py::arg("graph"), py::arg("labels"), py::arg("deployer"), py::arg("max_depth") = fundsource::kDefaultMaxDepth);

  m.def("f1_score", &ml::f1_score);
  m.def(
      "evaluate",
      [](const std::vector<double>& p, const std::vector<int>& y, double thr) {
        const auto r = ml::evaluate(p, y, thr);
        py::dict d;
        d["tp"] = r.tp;
        d["fp"] = r.fp;
        d["tn"] = r.tn;
        d["fn"] = r.fn;
        d["accuracy"] = r.accuracy;
        d["precision"] = r.precision;
        d["recall"] = r.recall;
        d["f1"] = r.f1;
        d["fpr"] = r.fpr;
        return d;
      },
      py::arg("probabilities"), py::arg("labels"), py::arg("threshold") = ml::kDefaultThreshold);
  m.def("chrono_split", [](const std::vector<std::int64_t>& ts, const std::vector<std::string>& ids) {
    if (ts.size() != ids.size()) throw std::invalid_argument("timestamps and ids differ in length");
    std::vector<ml::TimeKey> keys;
    for (std::size_t i = 0; i < ts.size(); ++i) keys.push_back({ts[i], ids[i]});
    const auto s = ml::chrono_split(keys);
    return py::make_tuple(s.base_train, s.meta_train, s.test);
  });
  m.def(
      "adasyn",
      [](const ml::Matrix& X, const std::vector<int>& y, double beta, std::size_t k, std::uint64_t seed) {
        auto r = ml::adasyn(X, y, beta, k, seed);
        return py::make_tuple(r.X, r.y, r.g);
      },
      py::arg("X"), py::arg("y"), py::arg("beta") = 1.0, py::arg("k") = 5, py::arg("seed") = 0);

  m.def(
      "synthetic_dataset",
      [](std::size_t n, std::uint64_t seed, double fraction) {
        return pipeline::write_dataset(pipeline::generate_synthetic({.contracts = n, .adversarial_fraction = fraction, .seed = seed}));
      },
      py::arg("contracts"), py::arg("seed") = 1, py::arg("adversarial_fraction") = 0.1);
  m.def("analyze_bytecode", &analyze, py::arg("code"), py::arg("model_dir") = "", py::arg("signature_db") = "");
  m.def("bundle_hash", [](const std::string& dir) { return ml::bundle_hash(dir).hex(); });

  py::register_exception<ml::IncompatibleBundle>(m, "IncompatibleBundle", PyExc_ValueError);
}
