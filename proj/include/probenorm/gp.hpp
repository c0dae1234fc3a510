#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "probenorm/pose.hpp"
#include "probenorm/rng.hpp"

namespace probenorm {

// Squared-exponential kernel parameters.  signal_variance and noise_variance
// are variances (not standard deviations); length_scale shares units with
// pose coordinates (degrees).
struct Hyperparams {
    double signal_variance = 1.0;
    double noise_variance = 0.1;
    double length_scale = 1.0;

    // Throws InvalidInputError unless all fields are finite,
    // signal_variance > 0, length_scale > 0 and noise_variance >= 0.
    void validate() const;

    Eigen::Vector3d to_log() const;  // (log signal, log noise, log length)
    static Hyperparams from_log(const Eigen::Vector3d& log_params);
};

// signal_variance * exp(-dist^2 / (2 length^2)), plus noise_variance when
// the two poses are the same training point (same_index).  Noise never
// enters cross-covariances between distinct indices.
double kernel_eval(const ProbePose& a, const ProbePose& b, const Hyperparams& hyper,
                   bool same_index);

struct PosteriorEstimate {
    double mean = 0.0;
    double variance = 0.0;
};

// Fitted GP posterior over a fixed training set.  Holds the Cholesky factor
// of the (jittered) Gram matrix; prediction and marginal likelihood reuse it.
class GpModel {
public:
    GpModel() = default;

    // Factors K = L L^T with jitter 1e-10 added up front, escalating by 10x
    // up to 1e-6 if the factorization fails.  Throws NumericalError with
    // size/jitter/conditioning diagnostics when the matrix stays effectively
    // singular (e.g. duplicated poses with zero noise).
    static GpModel fit(std::span<const ProbePose> poses, std::span<const double> values,
                       const Hyperparams& hyper);

    // Posterior at a query pose under the zero prior mean.  The returned
    // variance includes noise_variance (it predicts an observation) and is
    // clamped at zero against roundoff.
    PosteriorEstimate predict(const ProbePose& query) const;

    // Posterior of the noise-free latent objective: predict() with the
    // white-noise floor removed.  Re-measuring a well-sampled pose keeps a
    // full noise_variance of observation spread but adds nothing to what is
    // known about the objective itself.
    PosteriorEstimate predict_latent(const ProbePose& query) const;

    double log_marginal_likelihood() const { return lml_; }

    // Gradient of the log marginal likelihood with respect to
    // (log signal_variance, log noise_variance, log length_scale).
    Eigen::Vector3d lml_gradient_log() const;

    const Hyperparams& hyper() const { return hyper_; }
    std::size_t size() const { return poses_.size(); }
    const std::vector<ProbePose>& train_poses() const { return poses_; }
    const Eigen::VectorXd& train_values() const { return values_; }
    double jitter_used() const { return jitter_; }

private:
    std::vector<ProbePose> poses_;
    Eigen::VectorXd values_;
    Hyperparams hyper_;
    Eigen::MatrixXd chol_lower_;  // L of the jittered Gram matrix
    Eigen::VectorXd alpha_;       // K^-1 y
    Eigen::MatrixXd rbf_;         // noise-free kernel block, kept for gradients
    Eigen::MatrixXd dist2_;       // pairwise squared distances
    double jitter_ = 0.0;
    double lml_ = 0.0;
};

GpModel gp_fit(std::span<const ProbePose> poses, std::span<const double> values,
               const Hyperparams& hyper);
PosteriorEstimate gp_predict(const GpModel& model, const ProbePose& query);

struct LmlWithGradient {
    double value = 0.0;
    Eigen::Vector3d grad_log = Eigen::Vector3d::Zero();
};

LmlWithGradient log_marginal_likelihood(std::span<const ProbePose> poses,
                                        std::span<const double> values,
                                        const Hyperparams& hyper);

// Box constraints for hyperparameter search, in log space, ordered
// (log signal, log noise, log length).
struct HyperBounds {
    Eigen::Vector3d log_lo;
    Eigen::Vector3d log_hi;

    // Signal variance e^[-6,6], noise variance e^[-12,2], length scale
    // between 1% and 10x of the search-domain width.
    static HyperBounds for_domain_width(double width_deg);
};

struct HyperFitResult {
    Hyperparams hyper;
    double lml = 0.0;
    bool improved = false;  // false: kept the incumbent, no restart beat it
};

// Maximizes the log marginal likelihood with bounded L-BFGS from the
// incumbent (warm start) plus n_restarts random initializations drawn from
// rng.  Keeps the incumbent when nothing improves on it.
HyperFitResult fit_hyperparams(std::span<const ProbePose> poses,
                               std::span<const double> values, const HyperBounds& bounds,
                               int n_restarts, Rng& rng,
                               const Hyperparams* incumbent = nullptr);

}  // namespace probenorm
