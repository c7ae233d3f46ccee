#include "sentinel/ml/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "json.hpp"
#include <stdexcept>

#include "sentinel/common/keccak.hpp"
#include "sentinel/common/text.hpp"
#include "sentinel/ml/adasyn.hpp"
#include "sentinel/ml/selection.hpp"
#include "sentinel/ml/splits.hpp"
#include "sentinel/pscft/pscft.hpp"

namespace sentinel::ml {

using features::FeatureRecord;
using Json = nlohmann::json;

namespace {

int label_of(const FeatureRecord& r) {
  if (!r.label || (*r.label != 0 && *r.label != 1))
    throw std::invalid_argument("record " + r.contract_id + " lacks a 0/1 label");
  return *r.label;
}

std::vector<FeatureRecord> pick(const std::vector<FeatureRecord>& all, const std::vector<std::size_t>& idx) {
  std::vector<FeatureRecord> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

std::vector<TimeKey> keys_of(const std::vector<FeatureRecord>& records) {
  std::vector<TimeKey> keys;
  keys.reserve(records.size());
  for (const auto& r : records) keys.push_back({r.deploy_timestamp, r.contract_id});
  return keys;
}

bool both_classes(const std::vector<int>& y) {
  return std::find(y.begin(), y.end(), 0) != y.end() && std::find(y.begin(), y.end(), 1) != y.end();
}

EvalReport eval_vec(const std::vector<double>& p, const std::vector<int>& y) { return evaluate(p, y); }

}  // namespace

std::vector<double> Ensemble::encode(const FeatureRecord& r) const {
  return features::encode(r, normalizer, encoding);
}

std::vector<TokenId> Ensemble::tokens(const FeatureRecord& r) const {
  if (!transformer) throw std::logic_error("ensemble has no transformer");
  return vocab.encode_text(r.pscft, transformer->config().max_length);
}

double Ensemble::transformer_proba(const FeatureRecord& r) const { return transformer->predict_proba(tokens(r)); }

double Ensemble::candidate_proba(std::size_t index, const FeatureRecord& r) const {
  const auto x = encode(r);
  const auto& c = *candidates.at(index);
  if (x.size() != c.input_dimension()) throw IncompatibleBundle("encoded feature width does not match the candidate");
  return c.predict_proba(Vector(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()))));
}

double Ensemble::meta_proba(std::size_t index, double pc, double pt) const {
  Vector v(2);
  v << pc, pt;
  return metas.at(index)->predict_proba(v);
}

Prediction Ensemble::predict(const FeatureRecord& r) const {
  Prediction p;
  p.p_candidate = candidate_proba(selected_candidate, r);
  p.p_transformer = transformer_proba(r);
  p.p_pred = std::clamp(meta_proba(selected_meta, p.p_candidate, p.p_transformer), 0.0, 1.0);
  p.label = p.p_pred >= kDefaultThreshold ? 1 : 0;
  return p;
}

std::vector<FeatureRecord> test_slice(const std::vector<FeatureRecord>& records, double train_fraction,
                                      double meta_fraction) {
  return pick(records, chrono_split(keys_of(records), train_fraction, meta_fraction).test);
}

Ensemble train_ensemble(const std::vector<FeatureRecord>& records, const EnsembleConfig& cfg, TrainReport* report) {
  for (const auto& r : records) label_of(r);
  const auto split = chrono_split(keys_of(records), cfg.train_fraction, cfg.meta_fraction);
  const auto base = pick(records, split.base_train);
  const auto meta = pick(records, split.meta_train);
  TrainReport rep;
  rep.sizes = {base.size(), meta.size(), split.test.size(), 0};

  std::vector<int> yb, ym;
  for (const auto& r : base) yb.push_back(*r.label);
  for (const auto& r : meta) ym.push_back(*r.label);
  if (!both_classes(yb)) throw std::invalid_argument("base_train holds a single class");
  if (!both_classes(ym)) throw std::invalid_argument("meta_train holds a single class");

  Ensemble e;
  e.seed = cfg.seed;
  e.encoding = cfg.encoding;
  e.normalizer = features::fit_normalizer(base);

  // feature classifiers
  const auto dim = static_cast<Eigen::Index>(features::encoded_dimension(cfg.encoding));
  Matrix Xb(static_cast<Eigen::Index>(base.size()), dim);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto x = e.encode(base[i]);
    Xb.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Vector>(x.data(), dim).transpose();
  }
  Matrix Xa = Xb;
  std::vector<int> ya = yb;
  const auto minority = static_cast<std::size_t>(std::count(yb.begin(), yb.end(), 1));
  if (minority >= 2 && minority * 2 < yb.size()) {
    const std::size_t k = std::min(cfg.adasyn_k, minority - 1);
    if (k != cfg.adasyn_k) rep.notes.push_back("adasyn k reduced to " + std::to_string(k));
    auto aug = adasyn(Xb, yb, cfg.adasyn_beta, k, cfg.seed);
    rep.sizes.synthetic = aug.origins.size();
    Xa = std::move(aug.X);
    ya = std::move(aug.y);
  } else {
    rep.notes.push_back("adasyn skipped: minority class too small or not a minority");
  }
  CandidateParams cp = cfg.candidates;
  cp.dt.seed = cfg.seed;
  cp.rf.seed = cfg.seed;
  for (auto kind : kCandidateKinds) e.candidates.push_back(train_candidate(kind, Xa, ya, cp));

  // transformer on base_train docs, early stopping on its latest slice
  std::vector<std::string> docs;
  for (const auto& r : base) docs.push_back(r.pscft);
  e.vocab = TokenVocabulary::build_from_text(docs, cfg.vocab_min_frequency);
  TransformerConfig tc = cfg.transformer;
  tc.vocab_size = e.vocab.size();
  tc.seed = cfg.seed;
  std::vector<LabeledSequence> seqs;
  for (const auto& r : base) seqs.push_back({e.vocab.encode_text(r.pscft, tc.max_length), *r.label});
  const auto hold = static_cast<std::size_t>(std::floor(cfg.transformer_holdout * static_cast<double>(seqs.size())));
  std::vector<LabeledSequence> tr(seqs.begin(), seqs.end() - static_cast<std::ptrdiff_t>(hold));
  std::vector<LabeledSequence> va(seqs.end() - static_cast<std::ptrdiff_t>(hold), seqs.end());
  std::vector<int> ytr;
  for (const auto& s : tr) ytr.push_back(s.label);
  if (!both_classes(ytr)) {
    tr = seqs;
    va.clear();
    rep.notes.push_back("transformer holdout dropped: earlier slice holds a single class");
  }
  e.transformer.emplace(train_transformer(tr, va, tc, &rep.transformer_log));

  // candidate selection and stacking inputs on meta_train
  std::vector<double> pt(meta.size());
  std::vector<std::vector<double>> pc(e.candidates.size(), std::vector<double>(meta.size()));
  for (std::size_t i = 0; i < meta.size(); ++i) {
    pt[i] = e.transformer_proba(meta[i]);
    for (std::size_t c = 0; c < e.candidates.size(); ++c) pc[c][i] = e.candidate_proba(c, meta[i]);
  }
  for (const auto& p : pc) e.candidate_validation.push_back(eval_vec(p, ym));
  e.selected_candidate = select_best(e.candidate_validation);

  Matrix P(static_cast<Eigen::Index>(meta.size()), 2);
  for (std::size_t i = 0; i < meta.size(); ++i) {
    P(static_cast<Eigen::Index>(i), 0) = pc[e.selected_candidate][i];
    P(static_cast<Eigen::Index>(i), 1) = pt[i];
  }
  const auto mh = static_cast<std::size_t>(std::floor(cfg.meta_holdout * static_cast<double>(meta.size())));
  const auto fit_n = meta.size() - mh;
  std::vector<int> yfit(ym.begin(), ym.begin() + static_cast<std::ptrdiff_t>(fit_n));
  std::vector<int> ysel(ym.begin() + static_cast<std::ptrdiff_t>(fit_n), ym.end());
  const bool holdout_ok = mh > 0 && both_classes(yfit) && !ysel.empty();
  if (!holdout_ok) rep.notes.push_back("meta selection on training fit: holdout unusable");
  const Matrix Pfit = holdout_ok ? Matrix(P.topRows(static_cast<Eigen::Index>(fit_n))) : P;
  const Matrix Psel = holdout_ok ? Matrix(P.bottomRows(static_cast<Eigen::Index>(mh))) : P;
  const auto& yf = holdout_ok ? yfit : ym;
  const auto& ys = holdout_ok ? ysel : ym;
  for (auto kind : kMetaKinds) {
    auto m = train_meta(kind, Pfit, yf, cfg.metas);
    const Vector p = m->predict_proba(Psel);
    e.meta_validation.push_back(evaluate(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), ys));
  }
  e.selected_meta = select_best(e.meta_validation);
  for (auto kind : kMetaKinds) e.metas.push_back(train_meta(kind, P, ym, cfg.metas));

  if (report) *report = std::move(rep);
  return e;
}

std::vector<EvalRow> evaluate_ensemble(const Ensemble& e, const std::vector<FeatureRecord>& records) {
  if (records.empty()) throw std::invalid_argument("evaluate_ensemble: no records");
  std::vector<int> y;
  for (const auto& r : records) y.push_back(label_of(r));
  std::vector<std::vector<double>> pc(e.candidates.size(), std::vector<double>(records.size()));
  std::vector<double> pt(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t c = 0; c < e.candidates.size(); ++c) pc[c][i] = e.candidate_proba(c, records[i]);
    pt[i] = e.transformer_proba(records[i]);
  }
  std::vector<EvalRow> rows;
  for (std::size_t c = 0; c < e.candidates.size(); ++c) rows.push_back({e.candidates[c]->kind(), eval_vec(pc[c], y)});
  rows.push_back({"Transformer", eval_vec(pt, y)});
  for (std::size_t m = 0; m < e.metas.size(); ++m) {
    std::vector<double> pm(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) pm[i] = e.meta_proba(m, pc[e.selected_candidate][i], pt[i]);
    rows.push_back({"Meta-" + e.metas[m]->kind(), eval_vec(pm, y)});
  }
  return rows;
}

// ---- bundle ----

namespace {

Json report_json(const EvalReport& r) {
  return Json{{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}, {"accuracy", r.accuracy},
              {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}, {"fpr", r.fpr}};
}

EvalReport report_from_json(const Json& j) {
  return report_from_counts(j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(),
                            j.at("tn").get<std::uint64_t>(), j.at("fn").get<std::uint64_t>());
}

void write_bytes(const std::filesystem::path& p, const Bytes& b) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

Bytes read_bytes(const std::filesystem::path& p) {
  const auto s = read_file(p.string());
  return Bytes(s.begin(), s.end());
}

std::string file_hash(const Bytes& b) { return keccak256(b).hex(); }

}  // namespace

void save_bundle(const Ensemble& e, const std::filesystem::path& dir) {
  if (!e.transformer || e.candidates.empty() || e.metas.empty()) throw std::invalid_argument("ensemble is incomplete");
  std::filesystem::create_directories(dir);
  Json m;
  m["format_version"] = kBundleFormatVersion;
  m["seed"] = e.seed;
  m["encoding"] = {{"include_verified", e.encoding.include_verified},
                   {"dimension", features::encoded_dimension(e.encoding)},
                   {"features", features::feature_names(e.encoding)}};

  const auto vocab_text = e.vocab.serialize();
  write_file((dir / "vocab.txt").string(), vocab_text);
  m["vocab"] = {{"file", "vocab.txt"}, {"size", e.vocab.size()}, {"hash", e.vocab.hash().hex()}};

  const Bytes norm = e.normalizer.serialize();
  write_bytes(dir / "normalizer.bin", norm);
  m["normalizer"] = {{"file", "normalizer.bin"}, {"hash", e.normalizer.hash().hex()}};

  auto dump_model = [&](const Classifier& c, const std::string& file) {
    BinaryWriter w;
    c.save(w);
    write_bytes(dir / file, w.bytes());
    return Json{{"kind", c.kind()}, {"file", file}, {"hash", file_hash(w.bytes())}};
  };
  m["candidates"] = Json::array();
  for (std::size_t i = 0; i < e.candidates.size(); ++i) {
    auto j = dump_model(*e.candidates[i], "candidate_" + e.candidates[i]->kind() + ".bin");
    j["validation"] = report_json(e.candidate_validation.at(i));
    m["candidates"].push_back(j);
  }
  m["selected_candidate"] = e.selected_candidate;
  m["metas"] = Json::array();
  for (std::size_t i = 0; i < e.metas.size(); ++i) {
    auto j = dump_model(*e.metas[i], "meta_" + e.metas[i]->kind() + ".bin");
    j["validation"] = report_json(e.meta_validation.at(i));
    m["metas"].push_back(j);
  }
  m["selected_meta"] = e.selected_meta;

  BinaryWriter tw;
  e.transformer->save(tw);
  write_bytes(dir / "transformer.bin", tw.bytes());
  const auto& tc = e.transformer->config();
  m["transformer"] = {{"file", "transformer.bin"},  {"hash", file_hash(tw.bytes())}, {"vocab_size", tc.vocab_size},
                      {"d_model", tc.d_model},      {"heads", tc.heads},             {"layers", tc.layers},
                      {"d_ff", tc.d_ff},            {"max_length", tc.max_length},   {"dropout", tc.dropout},
                      {"parameters", e.transformer->parameter_count()}};
  write_file((dir / "manifest.json").string(), m.dump(2) + "\n");
}

Ensemble load_bundle(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) throw IncompatibleBundle("no manifest.json in " + dir.string());
  Json m;
  try {
    m = Json::parse(read_file(manifest_path.string()));
  } catch (const Json::exception& ex) {
    throw IncompatibleBundle(std::string("manifest.json: ") + ex.what());
  }
  const int version = m.value("format_version", -1);
  if (version != kBundleFormatVersion)
    throw IncompatibleBundle("bundle format version " + std::to_string(version) + ", expected " +
                             std::to_string(kBundleFormatVersion));
  try {
    Ensemble e;
    e.seed = m.at("seed").get<std::uint64_t>();
    e.encoding.include_verified = m.at("encoding").at("include_verified").get<bool>();
    if (m["encoding"].at("dimension").get<std::size_t>() != features::encoded_dimension(e.encoding))
      throw IncompatibleBundle("encoded dimension mismatch");

    e.vocab = TokenVocabulary::deserialize(read_file((dir / m["vocab"].at("file").get<std::string>()).string()));
    if (e.vocab.hash().hex() != m["vocab"].at("hash").get<std::string>())
      throw IncompatibleBundle("vocabulary hash does not match the manifest");
    e.normalizer = features::NormalizerStats::deserialize(read_bytes(dir / m["normalizer"].at("file").get<std::string>()));
    if (e.normalizer.hash().hex() != m["normalizer"].at("hash").get<std::string>())
      throw IncompatibleBundle("normalizer hash does not match the manifest");

    auto load_model = [&](const Json& j) {
      const auto bytes = read_bytes(dir / j.at("file").get<std::string>());
      if (file_hash(bytes) != j.at("hash").get<std::string>())
        throw IncompatibleBundle(j.at("file").get<std::string>() + ": hash does not match the manifest");
      BinaryReader r(bytes);
      auto c = load_classifier(r);
      if (!r.done()) throw IncompatibleBundle(j.at("file").get<std::string>() + ": trailing bytes");
      if (c->kind() != j.at("kind").get<std::string>()) throw IncompatibleBundle("model kind mismatch");
      return c;
    };
    for (const auto& j : m.at("candidates")) {
      e.candidates.push_back(load_model(j));
      if (e.candidates.back()->input_dimension() != features::encoded_dimension(e.encoding))
        throw IncompatibleBundle("candidate input width does not match the encoding");
      e.candidate_validation.push_back(report_from_json(j.at("validation")));
    }
    for (const auto& j : m.at("metas")) {
      e.metas.push_back(load_model(j));
      if (e.metas.back()->input_dimension() != 2) throw IncompatibleBundle("meta input width must be 2");
      e.meta_validation.push_back(report_from_json(j.at("validation")));
    }
    e.selected_candidate = m.at("selected_candidate").get<std::size_t>();
    e.selected_meta = m.at("selected_meta").get<std::size_t>();
    if (e.selected_candidate >= e.candidates.size() || e.selected_meta >= e.metas.size())
      throw IncompatibleBundle("selected model index out of range");

    const auto& tj = m.at("transformer");
    const auto tbytes = read_bytes(dir / tj.at("file").get<std::string>());
    if (file_hash(tbytes) != tj.at("hash").get<std::string>())
      throw IncompatibleBundle("transformer weights hash does not match the manifest");
    BinaryReader tr(tbytes);
    e.transformer.emplace(TransformerModel::load(tr));
    if (!tr.done()) throw IncompatibleBundle("transformer.bin: trailing bytes");
    if (e.transformer->config().vocab_size != e.vocab.size())
      throw IncompatibleBundle("transformer vocabulary size does not match the vocabulary");
    return e;
  } catch (const IncompatibleBundle&) {
    throw;
  } catch (const std::exception& ex) {
    throw IncompatibleBundle(std::string("bundle unreadable: ") + ex.what());
  }
}

Hash32 bundle_hash(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  BinaryWriter w;
  for (const auto& f : files) {
    const auto bytes = read_bytes(f);
    w.str(f.filename().string());
    w.u64(bytes.size());
    w.str(std::string(bytes.begin(), bytes.end()));
  }
  return keccak256(w.bytes());
}

}  // namespace sentinel::ml
