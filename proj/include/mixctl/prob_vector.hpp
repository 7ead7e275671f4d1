#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "mixctl/types.hpp"

namespace mixctl {

/// Discrete probability distribution. Entries are clamped to >= 0 on
/// construction when they exceed -tol_neg (eigenvalues of numerically
/// diagonalized density matrices can be tiny negatives); anything more
/// negative, or a sum off 1 by more than tol_sum, is rejected.
class ProbVector {
  public:
    ProbVector() = default;

    explicit ProbVector(std::vector<double> entries, double tol_neg = tol::neg,
                        double tol_sum = tol::sum)
        : entries_(std::move(entries)) {
        if (entries_.empty()) throw ValidationError("ProbVector: empty");
        double s = 0.0;
        for (double& x : entries_) {
            if (!std::isfinite(x)) throw ValidationError("ProbVector: non-finite entry");
            if (x < -tol_neg)
                throw ValidationError("ProbVector: entry " + std::to_string(x) + " below -tol_neg");
            if (x < 0.0) x = 0.0;
            s += x;
        }
        if (std::abs(s - 1.0) > tol_sum)
            throw ValidationError("ProbVector: entries sum to " + std::to_string(s));
    }

    static ProbVector uniform(std::size_t d) {
        return ProbVector(std::vector<double>(d, 1.0 / static_cast<double>(d)));
    }

    /// For internally derived data (permutations and convex mixings of
    /// already-validated vectors), which needs no re-validation.
    static ProbVector unchecked(std::vector<double> entries) {
        ProbVector p;
        p.entries_ = std::move(entries);
        return p;
    }

    std::size_t dim() const { return entries_.size(); }
    double operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<double>& entries() const { return entries_; }

    RVector to_eigen() const {
        return Eigen::Map<const RVector>(entries_.data(), static_cast<Eigen::Index>(dim()));
    }

    static ProbVector from_eigen(const RVector& v, double tol_neg = tol::neg,
                                 double tol_sum = tol::sum) {
        return ProbVector(std::vector<double>(v.data(), v.data() + v.size()), tol_neg, tol_sum);
    }

  private:
    std::vector<double> entries_;
};

inline double l1_distance(const ProbVector& a, const ProbVector& b) {
    require_same_dim(static_cast<Eigen::Index>(a.dim()), static_cast<Eigen::Index>(b.dim()),
                     "l1_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

/// Permutation on levels {0,...,d-1}, stored so that applying it to a vector v
/// gives w with w[k] = v[image[k]]. As a matrix P this is P(k, image[k]) = 1.
class PermutationMap {
  public:
    PermutationMap() = default;

    explicit PermutationMap(std::vector<std::size_t> image) : image_(std::move(image)) {
        std::vector<bool> seen(image_.size(), false);
        for (std::size_t i : image_) {
            if (i >= image_.size() || seen[i])
                throw ValidationError("PermutationMap: image is not a bijection");
            seen[i] = true;
        }
    }

    static PermutationMap identity(std::size_t d) {
        std::vector<std::size_t> im(d);
        std::iota(im.begin(), im.end(), std::size_t{0});
        return PermutationMap(std::move(im));
    }

    static PermutationMap transposition(std::size_t d, std::size_t i, std::size_t j) {
        auto p = identity(d);
        std::swap(p.image_[i], p.image_[j]);
        return p;
    }

    std::size_t dim() const { return image_.size(); }
    std::size_t operator[](std::size_t k) const { return image_[k]; }
    const std::vector<std::size_t>& image() const { return image_; }

    bool is_identity() const {
        for (std::size_t k = 0; k < image_.size(); ++k)
            if (image_[k] != k) return false;
        return true;
    }

    template <typename T>
    std::vector<T> apply(const std::vector<T>& v) const {
        std::vector<T> out(v.size());
        for (std::size_t k = 0; k < image_.size(); ++k) out[k] = v[image_[k]];
        return out;
    }

    ProbVector apply(const ProbVector& p) const {
        return ProbVector::unchecked(apply(p.entries()));
    }

    /// compose(after, before): apply `before` first, then `after`.
    static PermutationMap compose(const PermutationMap& after, const PermutationMap& before) {
        std::vector<std::size_t> im(after.dim());
        for (std::size_t k = 0; k < im.size(); ++k) im[k] = before.image_[after.image_[k]];
        return PermutationMap(std::move(im));
    }

    PermutationMap inverse() const {
        std::vector<std::size_t> im(image_.size());
        for (std::size_t k = 0; k < image_.size(); ++k) im[image_[k]] = k;
        return PermutationMap(std::move(im));
    }

    RMatrix to_matrix() const {
        const auto d = static_cast<Eigen::Index>(image_.size());
        RMatrix m = RMatrix::Zero(d, d);
        for (Eigen::Index k = 0; k < d; ++k)
            m(k, static_cast<Eigen::Index>(image_[static_cast<std::size_t>(k)])) = 1.0;
        return m;
    }

  private:
    std::vector<std::size_t> image_;
};

}  // namespace mixctl
