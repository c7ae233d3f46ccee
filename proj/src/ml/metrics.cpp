#include "sentinel/ml/metrics.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace sentinel::ml {

namespace {
double ratio(std::uint64_t num, std::uint64_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }
}  // namespace

double f1_score(double precision, double recall) {
  return precision + recall == 0 ? 0.0 : 2 * precision * recall / (precision + recall);
}

EvalReport report_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.tn = tn;
  r.fn = fn;
  r.accuracy = ratio(tp + tn, r.total());
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  r.f1 = f1_score(r.precision, r.recall);
  r.fpr = ratio(fp, fp + tn);
  return r;
}

EvalReport evaluate(std::span<const double> probabilities, std::span<const int> labels, double threshold) {
  if (probabilities.empty()) throw std::invalid_argument("evaluate: empty input");
  if (probabilities.size() != labels.size()) throw std::invalid_argument("evaluate: length mismatch");
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("evaluate: labels must be 0 or 1");
    const bool pred = probabilities[i] >= threshold;
    if (pred && labels[i] == 1) ++tp;
    else if (pred) ++fp;
    else if (labels[i] == 1) ++fn;
    else ++tn;
  }
  return report_from_counts(tp, fp, tn, fn);
}

std::string format_report_row(const std::string& name, const EvalReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(22) << name << std::right << std::fixed << std::setprecision(4) << "  acc "
     << r.accuracy << "  prec " << r.precision << "  rec " << r.recall << "  f1 " << r.f1 << "  fpr " << r.fpr
     << "  (tp " << r.tp << " fp " << r.fp << " tn " << r.tn << " fn " << r.fn << ")";
  return os.str();
}

}  // namespace sentinel::ml
