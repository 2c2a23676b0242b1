#include "netq/regressors.hpp"

#include "netq/errors.hpp"
#include "netq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace netq {

double gaussian_kernel(double u) {
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * u * u);
}

void validate(const KernelConfig& cfg) {
    if (!(cfg.c > 0.0))
        throw DataError("kernel bandwidth magnitude c must be > 0");
    if (cfg.k < 1)
        throw DataError("kernel neighbor count k must be >= 1");
}

double bandwidth(const KernelConfig& cfg, const PointIndex& train_index, double lon, double lat) {
    validate(cfg);
    if (cfg.kind == KernelKind::Fixed)
        return cfg.c;
    const double rk = train_index.kth_distance(lon, lat, cfg.k);
    return cfg.c * rk * rk;
}

namespace {

struct CoreResult {
    double value;
    PredictFallback fallback;
};

// Weighted mean over the truncated neighbor set. `h` may be 0 (degenerate).
CoreResult predict_core(const std::vector<Neighbor>& nbrs, std::span<const double> targets,
                        double h) {
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    for (const Neighbor& nb : nbrs) {
        const double y = targets[static_cast<std::size_t>(nb.id)];
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
    }

    if (h == 0.0) {
        // R_k(x) = 0 means all k neighbors sit at distance 0; average them.
        double sum = 0.0;
        std::size_t n = 0;
        for (const Neighbor& nb : nbrs) {
            if (nb.dist == 0.0) {
                sum += targets[static_cast<std::size_t>(nb.id)];
                ++n;
            }
        }
        return {sum / static_cast<double>(n), PredictFallback::DegenerateBandwidth};
    }

    // exponent of the unnormalized Gaussian weight, shifted by its minimum
    double u_min = std::numeric_limits<double>::infinity();
    std::vector<double> us(nbrs.size());
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const double r = nbrs[i].dist / h;
        us[i] = 0.5 * r * r;
        u_min = std::min(u_min, us[i]);
    }
    if (!(u_min < std::numeric_limits<double>::infinity())) {
        // even the closest neighbor's exponent overflowed
        double sum = 0.0;
        for (const Neighbor& nb : nbrs)
            sum += targets[static_cast<std::size_t>(nb.id)];
        return {sum / static_cast<double>(nbrs.size()), PredictFallback::WeightUnderflow};
    }

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const double w = std::exp(u_min - us[i]); // in (0, 1], exactly 1 at the min
        num += w * targets[static_cast<std::size_t>(nbrs[i].id)];
        den += w;
    }
    const double value = std::clamp(num / den, y_min, y_max);
    return {value, PredictFallback::None};
}

} // namespace

FittedKernelModel::FittedKernelModel(PointIndex train_index, std::vector<double> train_targets,
                                     RegionParams params, const GridSegmentation* segmentation)
    : index_(std::move(train_index)), targets_(std::move(train_targets)), params_(params),
      seg_(segmentation) {
    validate(params_.dense);
    validate(params_.sparse);
    if (index_.size() != targets_.size())
        throw DataError("kernel model: index and target lengths differ");
    if (params_.dense.k > index_.size() || params_.sparse.k > index_.size())
        throw DataError("kernel model: k exceeds training size");
}

Prediction FittedKernelModel::predict(double lon, double lat) const {
    if (seg_ == nullptr)
        throw DataError("kernel model: no segmentation attached; use predict_with");
    const RegionClass region = seg_->classify(lon, lat);
    const KernelConfig& cfg = region == RegionClass::Dense ? params_.dense : params_.sparse;
    Prediction p = predict_with(cfg, lon, lat);
    p.region = region;
    return p;
}

Prediction FittedKernelModel::predict_with(const KernelConfig& cfg, double lon, double lat) const {
    const auto nbrs = index_.knn(lon, lat, cfg.k);
    // the k-th neighbor distance doubles as R_k(x) for the self-tuning case
    const double h = cfg.kind == KernelKind::Fixed ? cfg.c
                                                   : cfg.c * nbrs.back().dist * nbrs.back().dist;
    const CoreResult r = predict_core(nbrs, targets_, h);
    Prediction out;
    out.value = r.value;
    out.fallback = r.fallback;
    if (seg_ != nullptr)
        out.region = seg_->classify(lon, lat);
    return out;
}

std::vector<Prediction> FittedKernelModel::predict_batch(
    std::span<const std::array<double, 2>> lonlat, ExecMode mode) const {
    std::vector<Prediction> out(lonlat.size());
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic, 64)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(lonlat.size()); ++i)
            out[static_cast<std::size_t>(i)] =
                predict(lonlat[static_cast<std::size_t>(i)][0], lonlat[static_cast<std::size_t>(i)][1]);
    } else {
        for (std::size_t i = 0; i < lonlat.size(); ++i)
            out[i] = predict(lonlat[i][0], lonlat[i][1]);
    }
    return out;
}

CvResult cross_validate(const Dataset& smoothed, const std::vector<std::int64_t>& train_ids,
                        KernelKind kind, const std::vector<double>& candidate_cs,
                        const std::vector<std::size_t>& candidate_ks, std::size_t folds,
                        std::uint64_t seed, const GridSegmentation& seg, Metric metric,
                        ExecMode mode) {
    if (folds < 2)
        throw DataError("cross-validation needs at least 2 folds");
    if (candidate_cs.empty() || candidate_ks.empty())
        throw DataError("cross-validation needs non-empty candidate grids");
    if (train_ids.size() < folds)
        throw DataError("cross-validation needs at least one point per fold");

    // candidates in ascending (k, c) order; first strict win settles ties
    std::vector<std::pair<std::size_t, double>> cands;
    for (std::size_t k : candidate_ks)
        for (double c : candidate_cs) {
            validate(KernelConfig{kind, c, k});
            cands.emplace_back(k, c);
        }
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    const std::size_t max_k = cands.back().first;

    std::vector<std::int64_t> shuffled = train_ids;
    {
        Rng rng(seed);
        rng.shuffle(shuffled);
    }
    const std::size_t n = shuffled.size();

    // sse[cand][fold][region], counts alongside
    const std::size_t n_cand = cands.size();
    std::vector<double> sse(n_cand * folds * 2, 0.0);
    std::vector<std::size_t> cnt(n_cand * folds * 2, 0);
    const auto cell = [&](std::size_t cand, std::size_t fold, std::size_t region) {
        return (cand * folds + fold) * 2 + region;
    };

    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t lo = f * n / folds;
        const std::size_t hi = (f + 1) * n / folds;

        std::vector<std::int64_t> val_ids(shuffled.begin() + static_cast<std::ptrdiff_t>(lo),
                                          shuffled.begin() + static_cast<std::ptrdiff_t>(hi));
        std::sort(val_ids.begin(), val_ids.end());
        std::vector<std::int64_t> fit_ids;
        fit_ids.reserve(n - val_ids.size());
        fit_ids.insert(fit_ids.end(), shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(lo));
        fit_ids.insert(fit_ids.end(), shuffled.begin() + static_cast<std::ptrdiff_t>(hi), shuffled.end());
        std::sort(fit_ids.begin(), fit_ids.end());

        if (fit_ids.size() < max_k)
            throw DataError("cross-validation: fold training side smaller than largest k");

        std::vector<std::array<double, 2>> fit_locs(fit_ids.size());
        std::vector<double> fit_targets(fit_ids.size());
        for (std::size_t i = 0; i < fit_ids.size(); ++i) {
            const SamplePoint& p = smoothed.points.at(static_cast<std::size_t>(fit_ids[i]));
            fit_locs[i] = {p.lon, p.lat};
            fit_targets[i] = p.score;
        }
        const PointIndex fold_index = PointIndex::build(fit_locs, metric);
        const KernelConfig dummy{kind, 1.0, 1};
        const FittedKernelModel fold_model(fold_index, fit_targets,
                                           RegionParams{dummy, dummy}, nullptr);

        std::vector<RegionClass> val_region(val_ids.size());
        std::vector<double> val_truth(val_ids.size());
        std::vector<std::array<double, 2>> val_locs(val_ids.size());
        for (std::size_t i = 0; i < val_ids.size(); ++i) {
            const SamplePoint& p = smoothed.points.at(static_cast<std::size_t>(val_ids[i]));
            val_locs[i] = {p.lon, p.lat};
            val_truth[i] = p.score;
            val_region[i] = seg.classify(p.lon, p.lat);
        }

        for (std::size_t ci = 0; ci < n_cand; ++ci) {
            const KernelConfig cfg{kind, cands[ci].second, cands[ci].first};
            std::vector<double> err2(val_ids.size());
            const auto eval_one = [&](std::size_t i) {
                const double pred =
                    fold_model.predict_with(cfg, val_locs[i][0], val_locs[i][1]).value;
                const double e = pred - val_truth[i];
                err2[i] = e * e;
            };
            if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic, 64)
                for (std::int64_t i = 0; i < static_cast<std::int64_t>(val_ids.size()); ++i)
                    eval_one(static_cast<std::size_t>(i));
            } else {
                for (std::size_t i = 0; i < val_ids.size(); ++i)
                    eval_one(i);
            }
            // reduce in index order so parallel and serial runs agree exactly
            for (std::size_t i = 0; i < val_ids.size(); ++i) {
                const std::size_t region = val_region[i] == RegionClass::Dense ? 0 : 1;
                sse[cell(ci, f, region)] += err2[i];
                cnt[cell(ci, f, region)] += 1;
            }
        }
    }

    CvResult result;
    KernelConfig best[2];
    for (std::size_t region = 0; region < 2; ++region) {
        double best_mse = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t ci = 0; ci < n_cand; ++ci) {
            double total = 0.0;
            std::size_t used = 0;
            for (std::size_t f = 0; f < folds; ++f) {
                if (cnt[cell(ci, f, region)] == 0)
                    continue; // no validation points of this region in the fold
                total += sse[cell(ci, f, region)] / static_cast<double>(cnt[cell(ci, f, region)]);
                ++used;
            }
            if (used == 0)
                continue;
            const double mean_mse = total / static_cast<double>(used);
            result.table.push_back(CvEntry{region == 0 ? RegionClass::Dense : RegionClass::Sparse,
                                           cands[ci].second, cands[ci].first, mean_mse, used});
            if (mean_mse < best_mse) {
                best_mse = mean_mse;
                best[region] = KernelConfig{kind, cands[ci].second, cands[ci].first};
                found = true;
            }
        }
        if (!found)
            throw DataError(std::string("cross-validation: no validation points in any fold for "
                                        "the ") +
                            (region == 0 ? "dense" : "sparse") + " region");
    }
    result.selected = RegionParams{best[0], best[1]};
    return result;
}

} // namespace netq
