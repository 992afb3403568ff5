#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cyberrisk {

enum class PsiKind { Identity, Huber };

struct RobustConfig {
    double trim_fraction = 0.1;  ///< in [0, 0.5]
    double huber_k = 1.345;
    PsiKind psi = PsiKind::Huber;
    bool standardize = true;     ///< divide median deviations by the MAD before psi

    void validate() const;
};

struct CorrelationEstimate {
    std::string method;
    double value = 0.0;
    std::string first;
    std::string second;
    std::size_t n = 0;
};

CorrelationEstimate pearson(std::span<const double> x, std::span<const double> y);
CorrelationEstimate ssd_median_corr(std::span<const double> x, std::span<const double> y,
                                    const RobustConfig& config = {});
/// Mean product of signs about the medians; sgn(0) = 0 and division by the full n
/// unless drop_zero_terms is set.
CorrelationEstimate quadrant_corr(std::span<const double> x, std::span<const double> y,
                                  bool drop_zero_terms = false);

/// Trimmed sum n * T_alpha(z): n/(n-2r) times the sum of the central order statistics.
double trimmed_sum(std::vector<double> z, double trim_fraction);

struct McdOptions {
    std::size_t h = 0;                       ///< 0 selects ceil((n+p+1)/2)
    std::uint64_t exhaustive_budget = 1'000'000;
    std::size_t starts = 500;
    std::size_t concentration_steps = 20;
    bool consistency_factor = false;         ///< chi-square c_p instead of 1
    std::uint64_t seed = 0x6d6364;
};

struct McdResult {
    std::vector<std::size_t> subset;  ///< sorted row indices
    Eigen::VectorXd location;
    Eigen::MatrixXd scatter;
    Eigen::MatrixXd correlation;
    double determinant = 0.0;         ///< of the unscaled subset covariance
    double c_p = 1.0;
    bool exhaustive = false;
};

std::size_t mcd_default_h(std::size_t n, std::size_t p);
McdResult mcd(const Eigen::MatrixXd& data, const McdOptions& options = {});

/// Determinant of the (1/h) covariance of the rows in `subset`.
double subset_covariance_determinant(const Eigen::MatrixXd& data, std::span<const std::size_t> subset);

enum class CorrelationMethod { Pearson, Ssd, Quadrant, Mcd };

std::string to_string(CorrelationMethod m);
CorrelationMethod parse_correlation_method(const std::string& name);

/// Columns of `panel` are aligned series.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& panel, CorrelationMethod method,
                                   const std::vector<std::string>& labels = {}, const RobustConfig& config = {},
                                   const McdOptions& mcd_options = {});

struct PsdRepair {
    Eigen::MatrixXd matrix;
    bool repaired = false;
    double min_eigenvalue_before = 0.0;
};

/// Clip eigenvalues at `floor` and rescale to unit diagonal; inputs whose
/// eigenvalues already reach the floor come back unchanged.
PsdRepair nearest_psd(const Eigen::MatrixXd& matrix, double floor = 0.0);

/// CSV columns: row,column,value,method
void write_correlation_csv(std::ostream& out, const Eigen::MatrixXd& matrix, const std::vector<std::string>& labels,
                           const std::string& method, bool header = true);

}  // namespace cyberrisk
