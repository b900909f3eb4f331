#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "vx/core/error.hpp"
#include "vx/core/rng.hpp"
#include "vx/core/serialize.hpp"
#include "vx/core/types.hpp"

namespace vx {

/// y = A x + b with A stored row-major as d_out x d_in.
class LinearTransform {
public:
    enum class Kind : std::uint8_t { Generic = 0, RandomRotation = 1, PCA = 2 };

    LinearTransform() = default;

    LinearTransform(size_t d_in, size_t d_out, std::vector<float> a, std::vector<float> b,
                    bool orthonormal, Kind kind = Kind::Generic)
        : kind_(kind), d_in_(d_in), d_out_(d_out), a_(std::move(a)), b_(std::move(b)),
          orthonormal_(orthonormal), trained_(true) {
        detail::require_arg(a_.size() == d_in * d_out, "transform matrix must be d_out x d_in");
        detail::require_arg(b_.empty() || b_.size() == d_out, "transform bias must have d_out entries");
        if (b_.empty()) b_.assign(d_out, 0.0f);
    }

    /// Untrained PCA placeholder; pca_train or train() fills it in.
    static LinearTransform pca_untrained(size_t d_in, size_t d_out) {
        detail::require_arg(d_out >= 1 && d_out <= d_in, "PCA output dimension must be in [1, d]");
        LinearTransform t;
        t.kind_ = Kind::PCA;
        t.d_in_ = d_in;
        t.d_out_ = d_out;
        return t;
    }

    Kind kind() const { return kind_; }
    size_t d_in() const { return d_in_; }
    size_t d_out() const { return d_out_; }
    bool is_orthonormal() const { return orthonormal_; }
    bool is_trained() const { return trained_; }
    std::span<const float> matrix() const { return a_; }
    std::span<const float> bias() const { return b_; }
    /// Eigenvalues of the kept components, largest first (PCA only).
    std::span<const float> eigenvalues() const { return eigenvalues_; }

    /// Fits the PCA kind from data; other kinds need no training.
    void train(const VectorSet& x);

    void apply(const float* x, float* y) const {
        for (size_t r = 0; r < d_out_; ++r) {
            const float* row = a_.data() + r * d_in_;
            double s = b_[r];
            for (size_t c = 0; c < d_in_; ++c) s += static_cast<double>(row[c]) * x[c];
            y[r] = static_cast<float>(s);
        }
    }

    VectorSet apply(const VectorSet& x) const {
        detail::require(trained_, ErrorKind::NotTrained, "transform is not trained");
        detail::require_dim(x.d, d_in_, "LinearTransform::apply");
        VectorSet out(x.n, d_out_);
        for (size_t i = 0; i < x.n; ++i) apply(x.ptr(i), out.ptr(i));
        return out;
    }

    /// Inverse map, A^T (y - b). Exact only when the columns of A are orthonormal.
    VectorSet reverse(const VectorSet& y) const {
        detail::require(orthonormal_, ErrorKind::Unsupported, "reverse requires an orthonormal transform");
        detail::require_dim(y.d, d_out_, "LinearTransform::reverse");
        VectorSet out(y.n, d_in_);
        for (size_t i = 0; i < y.n; ++i) {
            for (size_t c = 0; c < d_in_; ++c) {
                double s = 0.0;
                for (size_t r = 0; r < d_out_; ++r) {
                    s += static_cast<double>(a_[r * d_in_ + c]) * (y.ptr(i)[r] - b_[r]);
                }
                out.ptr(i)[c] = static_cast<float>(s);
            }
        }
        return out;
    }

    void write(ByteWriter& w) const {
        w.section("LTRF", [&](ByteWriter& s) {
            s.put<std::uint8_t>(static_cast<std::uint8_t>(kind_));
            s.put<std::uint64_t>(d_in_);
            s.put<std::uint64_t>(d_out_);
            s.put<std::uint8_t>(orthonormal_ ? 1 : 0);
            s.put<std::uint8_t>(trained_ ? 1 : 0);
            s.put_vector(a_);
            s.put_vector(b_);
            s.put_vector(eigenvalues_);
        });
    }

    static LinearTransform read(ByteReader& r) {
        ByteReader s = r.section("LTRF");
        LinearTransform t;
        auto kind = s.get<std::uint8_t>();
        if (kind > 2) throw Error(ErrorKind::Format, "unknown transform kind");
        t.kind_ = static_cast<Kind>(kind);
        t.d_in_ = s.get<std::uint64_t>();
        t.d_out_ = s.get<std::uint64_t>();
        t.orthonormal_ = s.get<std::uint8_t>() != 0;
        t.trained_ = s.get<std::uint8_t>() != 0;
        t.a_ = s.get_vector<float>();
        t.b_ = s.get_vector<float>();
        t.eigenvalues_ = s.get_vector<float>();
        if (t.trained_ && (t.a_.size() != t.d_in_ * t.d_out_ || t.b_.size() != t.d_out_)) {
            throw Error(ErrorKind::Format, "transform payload size mismatch");
        }
        return t;
    }

    friend bool operator==(const LinearTransform&, const LinearTransform&) = default;

private:
    friend LinearTransform pca_train(const VectorSet& x, size_t d_out);

    Kind kind_ = Kind::Generic;
    size_t d_in_ = 0;
    size_t d_out_ = 0;
    std::vector<float> a_;
    std::vector<float> b_;
    std::vector<float> eigenvalues_;
    bool orthonormal_ = false;
    bool trained_ = false;
};

/// Seeded random orthonormal map: the Q factor of a Gaussian matrix, with
/// column signs fixed by R's diagonal so the result is uniform over rotations.
/// For d_out > d the columns of A are orthonormal (a norm-preserving
/// embedding); for d_out < d the rows are.
inline LinearTransform random_rotation(size_t d, std::uint64_t seed, size_t d_out = 0) {
    detail::require_arg(d >= 1, "random_rotation requires d >= 1");
    if (d_out == 0) d_out = d;
    size_t big = std::max(d, d_out);
    Rng rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd g(big, big);
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
        for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = gauss(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
        if (rmat(c, c) < 0) q.col(c) = -q.col(c);
    }
    std::vector<float> a(d_out * d);
    for (size_t r = 0; r < d_out; ++r) {
        for (size_t c = 0; c < d; ++c) a[r * d + c] = static_cast<float>(q(r, c));
    }
    return LinearTransform(d, d_out, std::move(a), {}, d_out >= d, LinearTransform::Kind::RandomRotation);
}

/// Projection onto the top d_out principal directions of mean-centered x.
/// Each component's sign makes its largest-magnitude coefficient positive.
inline LinearTransform pca_train(const VectorSet& x, size_t d_out) {
    const size_t d = x.d;
    detail::require_arg(d_out >= 1 && d_out <= d, "PCA output dimension must be in [1, d]");
    detail::require_arg(x.n >= d_out, "PCA needs at least d_out training vectors");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (size_t i = 0; i < x.n; ++i) {
        for (size_t j = 0; j < d; ++j) mean[j] += x.ptr(i)[j];
    }
    mean /= static_cast<double>(x.n);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd c(d);
    for (size_t i = 0; i < x.n; ++i) {
        for (size_t j = 0; j < d; ++j) c[j] = x.ptr(i)[j] - mean[j];
        cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(x.n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    detail::require(eig.info() == Eigen::Success, ErrorKind::InvalidArgument, "PCA eigendecomposition failed");

    LinearTransform t = LinearTransform::pca_untrained(d, d_out);
    t.a_.assign(d_out * d, 0.0f);
    t.b_.assign(d_out, 0.0f);
    t.eigenvalues_.resize(d_out);
    for (size_t r = 0; r < d_out; ++r) {
        // Eigen returns ascending eigenvalues.
        Eigen::Index col = static_cast<Eigen::Index>(d - 1 - r);
        Eigen::VectorXd v = eig.eigenvectors().col(col);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        for (size_t j = 0; j < d; ++j) t.a_[r * d + j] = static_cast<float>(v[j]);
        t.b_[r] = static_cast<float>(-v.dot(mean));
        t.eigenvalues_[r] = static_cast<float>(std::max(0.0, eig.eigenvalues()[col]));
    }
    t.orthonormal_ = d_out == d;
    t.trained_ = true;
    return t;
}

inline void LinearTransform::train(const VectorSet& x) {
    if (kind_ != Kind::PCA || trained_) return;
    *this = pca_train(x, d_out_);
}

} // namespace vx
