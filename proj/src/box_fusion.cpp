#include "cbs/box_fusion.hpp"

#include "cbs/error.hpp"

#include <algorithm>
#include <numeric>

namespace cbs {

RescaleMode parse_rescale_mode(std::string_view name) {
    if (name == "clip") return RescaleMode::clip;
    if (name == "linear") return RescaleMode::linear;
    throw ConfigError("unknown rescale mode '" + std::string(name) + "' (expected clip or linear)");
}

void WbfConfig::validate() const {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) throw ConfigError("IoU threshold must lie in (0, 1)");
    if (!(post_threshold > 0.0 && post_threshold < 1.0)) throw ConfigError("post threshold must lie in (0, 1)");
    if (n_sources == 0) throw ConfigError("n_sources must be positive");
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    const double inter = iw > 0.0 && ih > 0.0 ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

void FusionAccumulator::add(const WeightedBox& member) {
    if (count_ == 0) reference_ = member.box;
    const auto& b = member.box;
    const double w = member.weight;
    weight_sum_ += w;
    dx1_ += w * (b.x1 - reference_.x1);
    dy1_ += w * (b.y1 - reference_.y1);
    dx2_ += w * (b.x2 - reference_.x2);
    dy2_ += w * (b.y2 - reference_.y2);
    ds_ += w * (b.score - reference_.score);
    ++count_;
    if (std::find(resolutions_.begin(), resolutions_.end(), member.resolution_id) == resolutions_.end())
        resolutions_.push_back(member.resolution_id);
}

FusedDetection FusionAccumulator::result() const {
    if (!(weight_sum_ > 0.0)) throw DataError("cannot fuse a cluster whose weights sum to zero");
    FusedDetection f;
    f.box.concept_id = reference_.concept_id;
    f.box.x1 = reference_.x1 + dx1_ / weight_sum_;
    f.box.y1 = reference_.y1 + dy1_ / weight_sum_;
    f.box.x2 = reference_.x2 + dx2_ / weight_sum_;
    f.box.y2 = reference_.y2 + dy2_ / weight_sum_;
    f.box.score = reference_.score + ds_ / weight_sum_;
    f.cluster_size = count_;
    f.n_resolutions = resolutions_.size();
    return f;
}

std::vector<BoxCluster> cluster(std::span<const WeightedBox> sorted, const WbfConfig& config) {
    std::vector<BoxCluster> clusters;
    for (const auto& wb : sorted) {
        auto match = std::find_if(clusters.begin(), clusters.end(), [&](const BoxCluster& c) {
            return c.fused.box.concept_id == wb.box.concept_id && iou(c.fused.box, wb.box) > config.iou_threshold;
        });
        if (match == clusters.end()) {
            clusters.emplace_back();
            match = std::prev(clusters.end());
        }
        match->members.push_back(wb);
        match->accumulator.add(wb);
        match->fused = match->accumulator.result();
    }
    return clusters;
}

FusedDetection fuse(std::span<const WeightedBox> members) {
    if (members.empty()) throw DataError("cannot fuse an empty cluster");
    FusionAccumulator acc;
    for (const auto& m : members) acc.add(m);
    return acc.result();
}

std::vector<FusedDetection> rescale_scores(std::vector<FusedDetection> fused, const WbfConfig& config) {
    const auto n = config.n_sources;
    for (auto& f : fused) {
        if (config.rescale_mode == RescaleMode::clip) {
            f.box.score *= static_cast<double>(std::min(f.cluster_size, n)) / static_cast<double>(n);
        } else {
            f.box.score = std::min(1.0, f.box.score * (static_cast<double>(f.cluster_size) / static_cast<double>(n)));
        }
    }
    return fused;
}

std::vector<FusedDetection> post_filter(std::span<const FusedDetection> fused, const WbfConfig& config) {
    std::vector<std::size_t> order(fused.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fused[a].box.score > fused[b].box.score; });

    std::vector<FusedDetection> kept;
    for (const auto i : order) {
        const auto& cand = fused[i];
        const bool covered = std::any_of(kept.begin(), kept.end(), [&](const FusedDetection& k) {
            return k.box.concept_id == cand.box.concept_id && iou(k.box, cand.box) > config.post_threshold;
        });
        if (!covered) kept.push_back(cand);
    }
    return kept;
}

std::vector<FusedDetection> wbf(std::span<const DetectionSet> sets, const WbfConfig& config) {
    config.validate();
    std::vector<WeightedBox> all;
    for (const auto& set : sets) {
        if (!(set.resolution_weight > 0.0)) throw ConfigError("resolution weights must be positive");
        for (const auto& b : set.boxes) {
            if (!b.valid()) throw DataError("detection box is not a valid normalized box");
            const double w = set.resolution_weight * b.score;
            // A zero-confidence box carries no weight and cannot seed a cluster.
            if (w > 0.0) all.push_back({b, w, set.resolution_id});
        }
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const WeightedBox& a, const WeightedBox& b) { return a.box.score > b.box.score; });

    std::vector<FusedDetection> fused;
    for (auto& c : cluster(all, config)) fused.push_back(c.fused);
    fused = rescale_scores(std::move(fused), config);
    if (config.post_filter) return post_filter(fused, config);
    std::stable_sort(fused.begin(), fused.end(),
                     [](const FusedDetection& a, const FusedDetection& b) { return a.box.score > b.box.score; });
    return fused;
}

}  // namespace cbs
