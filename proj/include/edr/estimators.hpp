#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edr/preprocess.hpp"
#include "edr/signalcore.hpp"
#include "edr/spectral.hpp"

namespace edr {

enum class Method { trad, pca, dm, cca, ad_re, ad_im, ad_sym, dl };

const char* method_name(Method m);

inline constexpr int kJointLead = 0;

struct EdrEstimate {
  Method method = Method::trad;
  int lead = 1;       // 1, 2 or kJointLead
  int component = 0;  // 1-based; 0 for the traditional estimate
  TimedSeries knots;  // one knot per beat
  std::vector<double> series10;
  bool degenerate = false;
  std::string note;

  // e.g. "trad_l1", "pca_l2_3", "ad_sym_4", "dl_1"
  std::string label() const;
};

// Diffusion kernels of one lead's QRS matrix.
struct KernelSet {
  Eigen::MatrixXd affinity;        // W, symmetric, unit diagonal
  Eigen::VectorXd bandwidth;       // sigma_i
  Eigen::MatrixXd affinity_alpha;  // D^-1 W D^-1
  Eigen::VectorXd degree_alpha;    // row sums of affinity_alpha
  Eigen::MatrixXd isotropic;       // P, symmetric
  Eigen::MatrixXd markov;          // K, row stochastic
};

KernelSet build_kernels(const Eigen::MatrixXd& x);
inline KernelSet build_kernels(const QrsMatrix& x) { return build_kernels(x.rows); }

// Beat times in seconds for one lead, and the two-lead average.
std::vector<double> beat_times(const IndexSequence& r, double rate = kProcessingRate);
std::vector<double> joint_beat_times(const IndexSequence& r1, const IndexSequence& r2,
                                     double rate = kProcessingRate);

EdrEstimate edr_traditional(const SampledSignal& lead, const IndexSequence& r, const IndexSequence& s, int lead_tag);

std::vector<EdrEstimate> edr_pca(const QrsMatrix& x, std::span<const double> times, int count = 5);

// Also returns the basis through `basis` when non-null.
std::vector<EdrEstimate> edr_diffusion_maps(const KernelSet& k, std::span<const double> times, int lead_tag,
                                            int count = 5, SpectralBasis* basis = nullptr);

// Lead-1 estimates first, then lead-2.
std::vector<EdrEstimate> edr_cca(const QrsMatrix& x1, const QrsMatrix& x2, std::span<const double> times1,
                                 std::span<const double> times2, int count = 5);

struct AlternatingDiffusion {
  Eigen::MatrixXd antisymmetric;  // A = K1 K2^T - K2 K1^T
  Eigen::MatrixXd symmetric;      // S = K1 K2^T + K2 K1^T
};
AlternatingDiffusion alternating_operators(const KernelSet& k1, const KernelSet& k2);

// Real parts, imaginary parts, then symmetric-operator estimates.
std::vector<EdrEstimate> edr_alternating_diffusion(const KernelSet& k1, const KernelSet& k2,
                                                   std::span<const double> times, int count = 5);

std::vector<EdrEstimate> edr_dynamic_laplacian(const KernelSet& k1, const KernelSet& k2,
                                               std::span<const double> times, int count = 5,
                                               SpectralBasis* basis = nullptr);

// Fills series10 on t_i = i / 10, i < floor(10 T). Null outside the knots.
void interpolate_to_10hz(EdrEstimate& est, double duration_seconds);
std::size_t grid10_length(double duration_seconds);

// Full estimate pool for a pre-processed record: 11 per lead, plus 30
// joint estimates for two leads (52 total at count = 5).
std::vector<EdrEstimate> compute_estimates(const PreprocessResult& pre, int count = 5);

}  // namespace edr
