#include "relgraph/report.hpp"

#include <array>
#include <charconv>

namespace relgraph {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string metrics_csv_header(int num_classes, bool with_k) {
  std::string out = with_k ? "k," : "";
  out += "mode,seed,iter,loss,acc_overall,acc_ambiguous";
  for (int c = 0; c < num_classes; ++c) {
    out += ",acc_class_" + std::to_string(c);
  }
  return out;
}

std::string metrics_csv_row(std::string_view mode, std::string_view seed, int iter, double loss,
                            const std::optional<Metrics>& metrics, int num_classes,
                            std::optional<int> k) {
  std::string out;
  if (k) {
    out += std::to_string(*k) + ",";
  }
  out += std::string(mode) + "," + std::string(seed) + "," + std::to_string(iter) + "," +
         format_double(loss);
  if (metrics) {
    out += "," + format_double(metrics->accuracy) + "," + format_double(metrics->ambiguous_accuracy);
    for (int c = 0; c < num_classes; ++c) {
      const auto idx = static_cast<std::size_t>(c);
      out += "," + (idx < metrics->per_class_accuracy.size()
                        ? format_double(metrics->per_class_accuracy[idx])
                        : std::string());
    }
  } else {
    out += ",,";
    for (int c = 0; c < num_classes; ++c) {
      out += ",";
    }
  }
  return out;
}

}  // namespace relgraph
