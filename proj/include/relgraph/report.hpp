#pragma once

#include "relgraph/train.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace relgraph {

/// Shortest decimal that round-trips to the same double.
[[nodiscard]] std::string format_double(double v);

/// mode,seed,iter,loss,acc_overall,acc_ambiguous,acc_class_0..acc_class_{C-1}
/// A leading "k" column is added when with_k is set.
[[nodiscard]] std::string metrics_csv_header(int num_classes, bool with_k = false);

/// One row; accuracy columns are left empty when metrics is absent.
[[nodiscard]] std::string metrics_csv_row(std::string_view mode, std::string_view seed, int iter,
                                          double loss, const std::optional<Metrics>& metrics,
                                          int num_classes, std::optional<int> k = std::nullopt);

}  // namespace relgraph
