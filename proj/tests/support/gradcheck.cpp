#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sentinel::testing {

GradCheck central_difference_check(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                                   const std::vector<double>& analytic, double h, double floor) {
  if (analytic.size() != x.size()) throw std::invalid_argument("gradient size mismatch");
  GradCheck out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    const double numeric = (up - down) / (2 * h);
    const double rel =
        std::abs(analytic[i] - numeric) / std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    if (rel > out.max_rel_error) {
      out.max_rel_error = rel;
      out.worst_index = i;
    }
    ++out.checked;
  }
  return out;
}

}  // namespace sentinel::testing
