#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cyberrisk {

enum class CopulaFamily { Independence, Gaussian, Joe, SurvivalJoe, PairProduct };

std::string to_string(CopulaFamily family);
CopulaFamily parse_copula_family(const std::string& name);

/// One bivariate block of a product-of-pairs copula. `parameter` is the
/// correlation for Gaussian and theta for (Survival-)Joe.
struct PairCopula {
    std::size_t first = 0;
    std::size_t second = 1;
    CopulaFamily family = CopulaFamily::Independence;
    double parameter = 0.0;
};

struct CopulaSpec {
    CopulaFamily family = CopulaFamily::Independence;
    std::size_t dimension = 2;
    Eigen::MatrixXd correlation;        ///< Gaussian only: PSD, unit diagonal
    double theta = 1.0;                 ///< Joe / SurvivalJoe only (bivariate)
    std::vector<PairCopula> pairs;      ///< PairProduct only
    std::optional<std::size_t> singleton;

    static CopulaSpec independence(std::size_t dimension);
    static CopulaSpec gaussian(Eigen::MatrixXd correlation);
    static CopulaSpec joe(double theta);
    static CopulaSpec survival_joe(double theta);
    static CopulaSpec pair_product(std::size_t dimension, std::vector<PairCopula> pairs);

    /// Throws ValidationError on a malformed spec (non-PSD Gaussian matrix included).
    void validate() const;
};

/// n x d matrix; entry (t, i) = average rank of observation t in margin i / (n + 1).
using PseudoObservations = Eigen::MatrixXd;

PseudoObservations pseudo_observations(const Eigen::MatrixXd& panel);

double joe_cdf(double u, double v, double theta);
double joe_density(double u, double v, double theta);
/// dC(u, v)/du, the conditional CDF of V given U = u.
double joe_h(double v, double u, double theta);
double survival_joe_cdf(double u, double v, double theta);
double survival_joe_density(double u, double v, double theta);
double gaussian_pair_density(double u, double v, double rho);

/// Bivariate log-density of a pair family at one point.
double pair_log_density(CopulaFamily family, double parameter, double u, double v);

/// Kendall's tau of the Joe copula by adaptive quadrature of the Archimedean identity.
double kendall_tau_joe(double theta);
/// Empirical Kendall's tau (tau-b with tie correction).
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Draw n points from the copula; deterministic in `seed`.
Eigen::MatrixXd sample_copula(const CopulaSpec& spec, std::size_t n, std::uint64_t seed);

inline constexpr double kJoeThetaUpperBound = 50.0;

struct PairFit {
    CopulaFamily family = CopulaFamily::Independence;
    double parameter = 0.0;
    double log_likelihood = 0.0;
    double aic = 0.0;
    double tau = 0.0;           ///< implied by the fitted family/parameter
    bool at_boundary = false;   ///< parameter hit the search bound
};

struct PairFitReport {
    PairFit best;
    std::vector<PairFit> candidates;  ///< one per family that fitted
};

std::vector<CopulaFamily> default_pair_families();

/// AIC selection over candidate families by bounded scalar maximum likelihood.
PairFitReport fit_pair_copula(std::span<const double> u, std::span<const double> v,
                              std::span<const CopulaFamily> families);

/// All partitions of {0..d-1} into disjoint pairs plus at most one singleton.
std::vector<CopulaSpec> enumerate_structures(std::size_t dimension);

struct StructureCandidate {
    CopulaSpec structure;
    double score = 0.0;                 ///< sum of pair log-likelihoods
    std::vector<PairFit> pair_fits;     ///< aligned with structure.pairs
};

/// Rank product-of-pairs structures by total pair log-likelihood (equivalently
/// smallest KL divergence to the empirical copula within the class).
std::vector<StructureCandidate> select_structure(const PseudoObservations& pseudo,
                                                 std::span<const CopulaFamily> families);

}  // namespace cyberrisk
