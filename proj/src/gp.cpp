#include "probenorm/gp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

#include "probenorm/errors.hpp"
#include "probenorm/lbfgs.hpp"

namespace probenorm {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-6;
// Reciprocal-condition floor below which a "successful" factorization is
// treated as singular (duplicated poses with zero noise land around 1e-10).
constexpr double kRcondMin = 1e-9;
constexpr double kLog2Pi = 1.8378770664093454836;

void check_pose_finite(const ProbePose& p, const char* where) {
    if (!std::isfinite(p.out_plane_deg) || !std::isfinite(p.in_plane_deg))
        throw InvalidInputError(std::string(where) + ": non-finite pose coordinates");
}

}  // namespace

void Hyperparams::validate() const {
    if (!std::isfinite(signal_variance) || !std::isfinite(noise_variance) ||
        !std::isfinite(length_scale))
        throw InvalidInputError("Hyperparams: non-finite value");
    if (signal_variance <= 0.0)
        throw InvalidInputError("Hyperparams: signal_variance must be positive");
    if (noise_variance < 0.0)
        throw InvalidInputError("Hyperparams: noise_variance must be non-negative");
    if (length_scale <= 0.0)
        throw InvalidInputError("Hyperparams: length_scale must be positive");
}

Eigen::Vector3d Hyperparams::to_log() const {
    return {std::log(signal_variance), std::log(noise_variance), std::log(length_scale)};
}

Hyperparams Hyperparams::from_log(const Eigen::Vector3d& log_params) {
    return {std::exp(log_params[0]), std::exp(log_params[1]), std::exp(log_params[2])};
}

double kernel_eval(const ProbePose& a, const ProbePose& b, const Hyperparams& hyper,
                   bool same_index) {
    check_pose_finite(a, "kernel_eval");
    check_pose_finite(b, "kernel_eval");
    hyper.validate();
    const double d = pose_distance(a, b);
    double k = hyper.signal_variance *
               std::exp(-d * d / (2.0 * hyper.length_scale * hyper.length_scale));
    if (same_index) k += hyper.noise_variance;
    return k;
}

GpModel GpModel::fit(std::span<const ProbePose> poses, std::span<const double> values,
                     const Hyperparams& hyper) {
    hyper.validate();
    if (poses.empty()) throw InvalidInputError("gp_fit: empty training set");
    if (poses.size() != values.size())
        throw InvalidInputError("gp_fit: pose/value count mismatch");
    const Eigen::Index n = static_cast<Eigen::Index>(poses.size());
    for (const ProbePose& p : poses) check_pose_finite(p, "gp_fit");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidInputError("gp_fit: non-finite training value");

    GpModel m;
    m.poses_.assign(poses.begin(), poses.end());
    m.values_ = Eigen::Map<const Eigen::VectorXd>(values.data(), n);
    m.hyper_ = hyper;

    m.dist2_.resize(n, n);
    m.rbf_.resize(n, n);
    const double inv2l2 = 1.0 / (2.0 * hyper.length_scale * hyper.length_scale);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double d = pose_distance(m.poses_[i], m.poses_[j]);
            m.dist2_(i, j) = m.dist2_(j, i) = d * d;
            const double k = hyper.signal_variance * std::exp(-d * d * inv2l2);
            m.rbf_(i, j) = m.rbf_(j, i) = k;
        }
    }

    Eigen::MatrixXd gram = m.rbf_;
    gram.diagonal().array() += hyper.noise_variance;

    // The jitter ladder only rescues outright factorization failures; a
    // factorization that succeeds but is conditioned worse than 1/kRcondMin
    // is rank-deficient for our purposes (duplicated poses with noise below
    // the jitter floor land here) and must be reported, not papered over.
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = kJitterStart;
    while (true) {
        Eigen::MatrixXd k = gram;
        k.diagonal().array() += jitter;
        llt.compute(k);
        if (llt.info() == Eigen::Success) break;
        if (jitter >= kJitterMax) {
            std::ostringstream msg;
            msg << "gp_fit: Gram matrix is not positive definite (n=" << n
                << ", jitter up to " << jitter << ")";
            throw NumericalError(msg.str());
        }
        jitter *= 10.0;
    }
    const double dmin = llt.matrixLLT().diagonal().minCoeff();
    const double dmax = llt.matrixLLT().diagonal().maxCoeff();
    const double rcond = (dmin / dmax) * (dmin / dmax);
    if (!(dmin > 0.0) || !std::isfinite(dmax) || rcond < kRcondMin) {
        std::ostringstream msg;
        msg << "gp_fit: Gram matrix is numerically singular (n=" << n
            << ", jitter " << jitter << ", rcond~" << rcond
            << "); check for duplicated poses or zero noise variance";
        throw NumericalError(msg.str());
    }

    m.jitter_ = jitter;
    m.chol_lower_ = llt.matrixL();
    m.alpha_ = llt.solve(m.values_);

    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(m.chol_lower_(i, i));
    m.lml_ = -0.5 * m.values_.dot(m.alpha_) - log_det - 0.5 * double(n) * kLog2Pi;
    return m;
}

PosteriorEstimate GpModel::predict(const ProbePose& query) const {
    if (poses_.empty()) throw InvalidInputError("gp_predict: model is not fitted");
    check_pose_finite(query, "gp_predict");
    const Eigen::Index n = static_cast<Eigen::Index>(poses_.size());
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i)
        k[i] = kernel_eval(query, poses_[i], hyper_, false);
    PosteriorEstimate out;
    out.mean = k.dot(alpha_);
    // Predictive variance of an observation: prior includes the noise term.
    const Eigen::VectorXd v = chol_lower_.triangularView<Eigen::Lower>().solve(k);
    const double prior = hyper_.signal_variance + hyper_.noise_variance;
    out.variance = std::max(0.0, prior - v.squaredNorm());
    return out;
}

PosteriorEstimate GpModel::predict_latent(const ProbePose& query) const {
    PosteriorEstimate out = predict(query);
    out.variance = std::max(0.0, out.variance - hyper_.noise_variance);
    return out;
}

Eigen::Vector3d GpModel::lml_gradient_log() const {
    const Eigen::Index n = static_cast<Eigen::Index>(poses_.size());
    Eigen::MatrixXd kinv = Eigen::MatrixXd::Identity(n, n);
    chol_lower_.triangularView<Eigen::Lower>().solveInPlace(kinv);
    chol_lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(kinv);

    // d LML / d theta = 0.5 * (alpha alpha^T - K^-1) : dK/dtheta, with theta
    // in log space: dK/dlog(signal) is the noise-free block itself,
    // dK/dlog(noise) = noise * I, dK/dlog(length) = rbf .* dist^2 / length^2.
    const Eigen::MatrixXd dl =
        rbf_.cwiseProduct(dist2_) / (hyper_.length_scale * hyper_.length_scale);

    Eigen::Vector3d grad;
    const auto pair_term = [&](const Eigen::MatrixXd& dk) {
        return 0.5 * (alpha_.dot(dk * alpha_) - kinv.cwiseProduct(dk).sum());
    };
    grad[0] = pair_term(rbf_);
    grad[1] = 0.5 * hyper_.noise_variance * (alpha_.squaredNorm() - kinv.trace());
    grad[2] = pair_term(dl);
    return grad;
}

GpModel gp_fit(std::span<const ProbePose> poses, std::span<const double> values,
               const Hyperparams& hyper) {
    return GpModel::fit(poses, values, hyper);
}

PosteriorEstimate gp_predict(const GpModel& model, const ProbePose& query) {
    return model.predict(query);
}

LmlWithGradient log_marginal_likelihood(std::span<const ProbePose> poses,
                                        std::span<const double> values,
                                        const Hyperparams& hyper) {
    const GpModel m = GpModel::fit(poses, values, hyper);
    return {m.log_marginal_likelihood(), m.lml_gradient_log()};
}

HyperBounds HyperBounds::for_domain_width(double width_deg) {
    if (!(width_deg > 0.0) || !std::isfinite(width_deg))
        throw InvalidInputError("HyperBounds: domain width must be positive");
    HyperBounds b;
    b.log_lo = {-6.0, -12.0, std::log(0.01 * width_deg)};
    b.log_hi = {6.0, 2.0, std::log(10.0 * width_deg)};
    return b;
}

HyperFitResult fit_hyperparams(std::span<const ProbePose> poses,
                               std::span<const double> values, const HyperBounds& bounds,
                               int n_restarts, Rng& rng, const Hyperparams* incumbent) {
    if (poses.size() < 2)
        throw InvalidInputError("fit_hyperparams: need at least two observations");
    if (n_restarts < 0) throw InvalidInputError("fit_hyperparams: negative restart count");

    const auto neg_lml = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) -> double {
        grad.setZero(3);
        try {
            const GpModel m = GpModel::fit(poses, values, Hyperparams::from_log(x));
            grad = -m.lml_gradient_log();
            return -m.log_marginal_likelihood();
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    Eigen::Vector3d start0;
    if (incumbent) {
        start0 = incumbent->to_log().cwiseMax(bounds.log_lo).cwiseMin(bounds.log_hi);
    } else {
        start0 = 0.5 * (bounds.log_lo + bounds.log_hi);
    }

    Eigen::VectorXd g(3);
    const double incumbent_neg = neg_lml(start0, g);

    std::vector<Eigen::Vector3d> starts{start0};
    for (int r = 0; r < n_restarts; ++r) {
        Eigen::Vector3d s;
        for (int i = 0; i < 3; ++i) s[i] = rng.uniform(bounds.log_lo[i], bounds.log_hi[i]);
        starts.push_back(s);
    }

    LbfgsOptions opts;
    double best_neg = incumbent_neg;
    Eigen::Vector3d best_x = start0;
    for (const Eigen::Vector3d& s : starts) {
        try {
            const LbfgsResult r =
                lbfgs_box_minimize(neg_lml, s, bounds.log_lo, bounds.log_hi, opts);
            if (std::isfinite(r.f) && r.f < best_neg) {
                best_neg = r.f;
                best_x = r.x;
            }
        } catch (const NumericalError&) {
            // Start point not factorizable; skip this restart.
        }
    }
    if (!std::isfinite(best_neg))
        throw NumericalError(
            "fit_hyperparams: no hyperparameter start produced a factorizable Gram matrix");

    HyperFitResult out;
    out.improved = !std::isfinite(incumbent_neg) ||
                   best_neg < incumbent_neg - 1e-12 * std::abs(incumbent_neg);
    if (!out.improved) {
        best_x = start0;
        best_neg = incumbent_neg;
    }
    out.hyper = Hyperparams::from_log(best_x);
    out.lml = -best_neg;
    return out;
}

}  // namespace probenorm
