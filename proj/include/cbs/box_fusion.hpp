#pragma once

#include "cbs/annotation.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cbs {

/// Boxes produced at one input resolution.
struct DetectionSet {
    std::vector<BoundingBox> boxes;
    int resolution_id = 0;
    double resolution_weight = 1.0;
};

enum class RescaleMode {
    clip,    // s * min(T_k, n) / n
    linear,  // min(1, s * T_k / n)
};

RescaleMode parse_rescale_mode(std::string_view name);

struct WbfConfig {
    double iou_threshold = 0.29;
    double post_threshold = 0.5;
    RescaleMode rescale_mode = RescaleMode::clip;
    std::size_t n_sources = 4;
    bool post_filter = true;

    void validate() const;
};

struct FusedDetection {
    BoundingBox box;
    std::size_t cluster_size = 1;
    std::size_t n_resolutions = 1;

    friend bool operator==(const FusedDetection&, const FusedDetection&) = default;
};

/// A box with its fusion weight w = alpha * s.
struct WeightedBox {
    BoundingBox box;
    double weight = 0.0;
    int resolution_id = 0;
};

/// Intersection over union; 0 when the union is empty.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Running weighted average of cluster members.
///
/// Coordinates and score are kept as offsets from the first member, so a
/// cluster of identical boxes reproduces that box exactly.
class FusionAccumulator {
public:
    void add(const WeightedBox& member);
    /// Throws DataError when no weight has been accumulated.
    [[nodiscard]] FusedDetection result() const;
    [[nodiscard]] std::size_t size() const noexcept { return count_; }

private:
    BoundingBox reference_{};
    double weight_sum_ = 0.0;
    double dx1_ = 0.0, dy1_ = 0.0, dx2_ = 0.0, dy2_ = 0.0, ds_ = 0.0;
    std::size_t count_ = 0;
    std::vector<int> resolutions_;
};

struct BoxCluster {
    std::vector<WeightedBox> members;
    FusionAccumulator accumulator;
    FusedDetection fused;
};

/// Sequential clustering of boxes already sorted by descending confidence:
/// each box joins the first cluster of the same class whose current fused box
/// overlaps it with IoU > T, else it opens a new cluster.
std::vector<BoxCluster> cluster(std::span<const WeightedBox> sorted, const WbfConfig& config);

/// Weighted average of a non-empty cluster.
FusedDetection fuse(std::span<const WeightedBox> members);

std::vector<FusedDetection> rescale_scores(std::vector<FusedDetection> fused, const WbfConfig& config);

/// Per class, drops every box overlapping a higher-ranked kept box with
/// IoU > T_post. Output is sorted by descending score.
std::vector<FusedDetection> post_filter(std::span<const FusedDetection> fused, const WbfConfig& config);

/// Concatenate, sort, cluster, fuse, rescale and post-filter.
std::vector<FusedDetection> wbf(std::span<const DetectionSet> sets, const WbfConfig& config);

}  // namespace cbs
