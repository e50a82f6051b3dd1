#include <algorithm>
#include <numeric>
#include <vector>

#include "prunedoc/classifier.hpp"
#include "prunedoc/errors.hpp"

namespace prunedoc {

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) {
        throw ShapeError("scores and labels differ in length");
    }
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    if (positives == 0) {
        throw DegenerateDataError("average precision is undefined without positives");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] == 1) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return sum / static_cast<double>(positives);
}

}  // namespace prunedoc
