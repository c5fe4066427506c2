#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. None of them call into the library's selection or fusion code.

#include "cbs/annotation.hpp"
#include "cbs/box_fusion.hpp"
#include "cbs/sampler.hpp"
#include "cbs/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

inline cbs::SampleAnnotation sample(std::string id, std::initializer_list<std::uint32_t> ids) {
    cbs::SampleAnnotation s;
    s.sample_id = std::move(id);
    for (auto c : ids) s.concepts.push_back({cbs::ConceptId{c}, 1.0, std::nullopt});
    return s;
}

inline cbs::Superbatch superbatch(std::vector<cbs::SampleAnnotation> samples) {
    cbs::Superbatch sb;
    sb.samples = std::move(samples);
    sb.origin_indices.resize(sb.samples.size());
    std::iota(sb.origin_indices.begin(), sb.origin_indices.end(), std::size_t{0});
    return sb;
}

// Indices sorted by (score desc, index asc), first k.
inline std::vector<std::size_t> sort_topk(const std::vector<double>& scores, std::size_t k) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    idx.resize(k);
    return idx;
}

struct DmTrace {
    std::vector<std::size_t> positions;
    std::size_t capped = 0;
    std::map<std::uint32_t, std::uint32_t> target;
};

// t_c = min(F_c, clamp(ceil(b * mean|C_i| / U), min, max)) from de-duplicated sets.
inline std::map<std::uint32_t, std::uint32_t> targets(const std::vector<std::vector<std::uint32_t>>& sets,
                                                      std::size_t b, const cbs::DmParams& p) {
    std::map<std::uint32_t, std::uint32_t> freq;
    std::uint64_t set_total = 0;
    for (const auto& s : sets) {
        for (auto c : s) ++freq[c];
        set_total += s.size();
    }
    std::map<std::uint32_t, std::uint32_t> t;
    if (freq.empty()) return t;
    // Smallest integer q with q * n * U >= b * total.
    std::uint64_t base = 0;
    while (base * sets.size() * freq.size() < b * set_total) ++base;
    base = std::clamp<std::uint64_t>(base, p.min_samples_concept, p.max_concept_frequency);
    for (auto [c, f] : freq) t[c] = static_cast<std::uint32_t>(std::min<std::uint64_t>(base, f));
    return t;
}

inline std::vector<std::vector<std::uint32_t>> concept_sets(const std::vector<cbs::SampleAnnotation>& samples) {
    std::vector<std::vector<std::uint32_t>> sets;
    for (const auto& a : samples) {
        std::set<std::uint32_t> s;
        for (const auto& c : a.concepts) s.insert(c.concept_id.value);
        sets.emplace_back(s.begin(), s.end());
    }
    return sets;
}

// Recomputes every gain at every step. Phase one skips samples holding a
// saturated concept, phase two does not, then the rest is taken in order.
inline DmTrace naive_dm(const cbs::Superbatch& sb, std::size_t b, const cbs::DmParams& p) {
    const std::size_t n = sb.size();
    const auto sets = concept_sets(sb.samples);
    std::map<std::uint32_t, std::uint32_t> freq;
    for (const auto& s : sets)
        for (auto c : s) ++freq[c];
    DmTrace out;
    out.target = targets(sets, b, p);
    if (freq.empty()) {
        for (std::size_t i = 0; i < b; ++i) out.positions.push_back(i);
        return out;
    }

    std::map<std::uint32_t, std::uint32_t> count;
    std::vector<bool> taken(n, false);
    const auto gain = [&](std::size_t i) {
        if (sets[i].empty()) return 0.0;
        double g = 0.0;
        for (auto c : sets[i]) {
            const auto t = out.target[c];
            const auto k = count[c];
            if (k >= t) continue;
            g += static_cast<double>(t - k) / static_cast<double>(t);
            if (p.rarity_bonus) g += 1.0 / (static_cast<double>(freq[c]) + p.rarity_epsilon);
        }
        return g / static_cast<double>(sets[i].size());
    };
    for (int phase = 0; phase < 2; ++phase) {
        while (out.positions.size() < b) {
            std::size_t best = n;
            double best_gain = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                if (phase == 0 && std::any_of(sets[i].begin(), sets[i].end(),
                                              [&](auto c) { return count[c] >= out.target[c]; }))
                    continue;
                const double g = gain(i);
                if (g > best_gain) {
                    best_gain = g;
                    best = i;
                }
            }
            if (best == n) break;
            taken[best] = true;
            out.positions.push_back(best);
            for (auto c : sets[best]) ++count[c];
        }
        if (phase == 0) out.capped = out.positions.size();
    }
    for (std::size_t i = 0; i < n && out.positions.size() < b; ++i)
        if (!taken[i]) out.positions.push_back(i);
    return out;
}

inline double box_iou(const cbs::BoundingBox& a, const cbs::BoundingBox& b) {
    const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
    const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
    const double inter = ix * iy;
    const double uni = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

struct RefBox {
    cbs::BoundingBox box;
    double w;
    int res;
};

// Weighted mean written as first-member value plus weighted mean offset.
inline cbs::FusedDetection ref_average(const std::vector<RefBox>& m) {
    const auto& r = m.front().box;
    double W = 0, x1 = 0, y1 = 0, x2 = 0, y2 = 0, s = 0;
    std::set<int> res;
    for (const auto& e : m) {
        W += e.w;
        x1 += e.w * (e.box.x1 - r.x1);
        y1 += e.w * (e.box.y1 - r.y1);
        x2 += e.w * (e.box.x2 - r.x2);
        y2 += e.w * (e.box.y2 - r.y2);
        s += e.w * (e.box.score - r.score);
        res.insert(e.res);
    }
    cbs::FusedDetection f;
    f.box = {r.x1 + x1 / W, r.y1 + y1 / W, r.x2 + x2 / W, r.y2 + y2 / W, r.concept_id, r.score + s / W};
    f.cluster_size = m.size();
    f.n_resolutions = res.size();
    return f;
}

inline std::vector<cbs::FusedDetection> reference_wbf(const std::vector<cbs::DetectionSet>& sets,
                                                      const cbs::WbfConfig& cfg) {
    std::vector<RefBox> all;
    for (const auto& s : sets)
        for (const auto& b : s.boxes)
            if (s.resolution_weight * b.score > 0.0) all.push_back({b, s.resolution_weight * b.score, s.resolution_id});
    std::stable_sort(all.begin(), all.end(), [](const RefBox& a, const RefBox& b) { return a.box.score > b.box.score; });

    std::vector<std::vector<RefBox>> clusters;
    for (const auto& e : all) {
        bool joined = false;
        for (auto& c : clusters) {
            const auto fused = ref_average(c);
            if (fused.box.concept_id == e.box.concept_id && box_iou(fused.box, e.box) > cfg.iou_threshold) {
                c.push_back(e);
                joined = true;
                break;
            }
        }
        if (!joined) clusters.push_back({e});
    }

    std::vector<cbs::FusedDetection> fused;
    const double n = static_cast<double>(cfg.n_sources);
    for (const auto& c : clusters) {
        auto f = ref_average(c);
        const double tk = static_cast<double>(c.size());
        if (cfg.rescale_mode == cbs::RescaleMode::clip)
            f.box.score *= std::min(tk, n) / n;
        else
            f.box.score = std::min(1.0, f.box.score * (tk / n));
        fused.push_back(f);
    }
    std::stable_sort(fused.begin(), fused.end(),
                     [](const auto& a, const auto& b) { return a.box.score > b.box.score; });
    if (!cfg.post_filter) return fused;

    // Re-cluster per class at T_post; the first (highest) member represents each group.
    std::vector<cbs::FusedDetection> heads;
    for (const auto& f : fused) {
        bool absorbed = false;
        for (const auto& h : heads)
            if (h.box.concept_id == f.box.concept_id && box_iou(h.box, f.box) > cfg.post_threshold) absorbed = true;
        if (!absorbed) heads.push_back(f);
    }
    return heads;
}

inline cbs::BoundingBox random_box(std::mt19937_64& rng, std::uint32_t classes) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double x = u(rng) * 0.8, y = u(rng) * 0.8;
    const double w = 0.02 + u(rng) * 0.2, h = 0.02 + u(rng) * 0.2;
    std::uniform_int_distribution<std::uint32_t> cls(0, classes - 1);
    return {x, y, std::min(1.0, x + w), std::min(1.0, y + h), cbs::ConceptId{cls(rng)}, 0.05 + 0.95 * u(rng)};
}

// Up to max_boxes boxes over 4 sources, half of them jittered copies so clusters form.
inline std::vector<cbs::DetectionSet> random_image(std::mt19937_64& rng, std::size_t max_boxes) {
    std::uniform_int_distribution<std::size_t> nb(0, max_boxes);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    std::vector<cbs::DetectionSet> sets(4);
    for (int r = 0; r < 4; ++r) sets[r].resolution_id = r;
    const std::size_t total = nb(rng);
    std::vector<cbs::BoundingBox> seeds;
    for (std::size_t i = 0; i < total; ++i) {
        cbs::BoundingBox b;
        if (!seeds.empty() && rng() % 2 == 0) {
            b = seeds[rng() % seeds.size()];
            b.x1 = std::clamp(b.x1 + jitter(rng), 0.0, 0.9);
            b.y1 = std::clamp(b.y1 + jitter(rng), 0.0, 0.9);
            b.x2 = std::clamp(b.x2 + jitter(rng), b.x1 + 0.01, 1.0);
            b.y2 = std::clamp(b.y2 + jitter(rng), b.y1 + 0.01, 1.0);
            b.score = std::clamp(b.score + jitter(rng) * 10.0, 0.01, 1.0);
        } else {
            b = random_box(rng, 3);
            seeds.push_back(b);
        }
        sets[rng() % 4].boxes.push_back(b);
    }
    return sets;
}

}  // namespace oracle
