#pragma once

#include <array>
#include <string>
#include <vector>

#include "san/numerics.hpp"
#include "san/params.hpp"

namespace san::analytic {

enum class UserClass { high, low };

/// How the conditional low-battery coverage expressions are read.
///
/// `consistent` keeps the 2*pi*lambda_1 density factor on the finite integral
/// of R_1^l and divides the first term of R_2^l by L_2 * A_2^l; both terms
/// then stay probabilities. `printed` evaluates the typeset grouping verbatim
/// (integral without the density factor, L_2^{-1} A_2^l in the denominator).
enum class Eq5Reading { consistent, printed };

struct ModelOptions {
    Eq5Reading reading = Eq5Reading::consistent;
    /// First load value in the sum over P(N_k = n) / (n + 1); 0 counts the
    /// typical user alone in its cell, 1 is the typeset lower limit.
    int load_sum_start = 0;
    /// Initial PMF truncation; doubled until the tail mass drops below 1e-6.
    int n_max = 512;
    numerics::Quadrature quadrature{};
};

struct AssociationModel {
    std::array<double, 2> a_high{};  ///< [A_1^h, A_2^h]
    std::array<double, 2> a_low{};   ///< [A_1^l, A_2^l]
    double r_c = 0.0;
    double r_s = 0.0;
    double m_distance = 0.0;    ///< (r_c + r_hat_a) (P1/P2)^{1/alpha}
    double lambda_tilde = 0.0;  ///< (lambda_2/lambda_1) (P2/P1)^{2/alpha}
};

struct ChargeProbabilities {
    std::array<double, 3> c_low{};  ///< c_l(1), c_l(2), c_l(3)
    double c_high = 0.0;
};

struct BatteryChain {
    ChargeProbabilities charge;
    numerics::Matrix transition;     ///< rows/cols L0..L3
    std::array<double, 4> steady{};  ///< q
    double p_high = 0.0;             ///< (q2 + q3) u_h
    double p_low = 0.0;              ///< q1 u_l
};

struct LoadPmf {
    Tier tier = Tier::macro;
    std::vector<double> pmf_high;
    std::vector<double> pmf_low;
    std::vector<double> pmf_total;
    int truncation = 0;
    double mean_high = 0.0;  ///< argument of the high-class Gamma-form PMF
    double mean_low = 0.0;

    double total_mass() const;
    double mean() const;
    /// sum_{n >= start} P(N = n) / (n + 1)
    double share(int start = 0) const;
};

struct ConditionalCoverage {
    double value = 0.0;             ///< clamped to [0, 1]
    double raw = 0.0;               ///< sum of the terms before clamping
    std::vector<double> terms;      ///< additive sub-terms as evaluated
    bool out_of_range = false;      ///< some sub-term or the sum left [0, 1] by > 1e-6
};

struct TierComponents {
    double association_weighted = 0.0;  ///< P_H A^h R^h + P_L A^l R^l
    double load_share = 0.0;            ///< sum_n P(N = n) / (n + 1) over the configured range
    double contribution = 0.0;          ///< load_share * association_weighted
    double mean_load = 0.0;             ///< mean of the truncated load PMF
};

struct RateCoverageBreakdown {
    double r_total = 0.0;
    double r_high = 0.0;  ///< R_k^h, identical for both tiers
    std::array<ConditionalCoverage, 2> r_low{};
    std::array<TierComponents, 2> tiers{};
    AssociationModel association;
    BatteryChain chain;
    double rho_m = 0.0;
    std::vector<std::string> warnings;
};

// Association probabilities.
double assoc_prob_high(const ScenarioConfig& cfg, Tier tier);
double assoc_prob_low(const ScenarioConfig& cfg, double p_tc, Tier tier);
AssociationModel association_model(const ScenarioConfig& cfg, double p_tc);

// Battery model.
ChargeProbabilities charge_probs(const ScenarioConfig& cfg, double p_tc);
numerics::Matrix transition_matrix(const ScenarioConfig& cfg, const ChargeProbabilities& charge);
BatteryChain battery_chain(const ScenarioConfig& cfg, double p_tc);

/// Gamma-form (shape 3.5 Voronoi) PMF of the other-user count, evaluated in
/// log space. `mean_arg` is lambda_u P A / lambda_k.
double gamma_form_pmf(double mean_arg, int n);

/// Throws TruncationError if more than 1e-6 of the mass lies above n_max.
LoadPmf load_pmf(const ScenarioConfig& cfg, const BatteryChain& chain, const AssociationModel& assoc, Tier tier,
                 int n_max);

/// Doubles n_max (starting at `initial`) until the tail drops below 1e-6.
LoadPmf load_pmf_auto(const ScenarioConfig& cfg, const BatteryChain& chain, const AssociationModel& assoc, Tier tier,
                      int initial = 512);

/// rho(theta, x) = tau^{2/alpha} int_{(M/x)^2 tau^{-2/alpha}}^inf du / (1 + u^{alpha/2}).
double rho(const ScenarioConfig& cfg, double m_distance, double x, const numerics::Quadrature& quad = {});

double cond_rate_cov_high(const ScenarioConfig& cfg, const AssociationModel& assoc, Tier tier,
                          const numerics::Quadrature& quad = {});

ConditionalCoverage cond_rate_cov_low(const ScenarioConfig& cfg, const AssociationModel& assoc, Tier tier,
                                      const ModelOptions& options = {});

/// Immutable per-(config, p_tc) cache of the quantities every rate-coverage
/// formula shares.
class Evaluation {
public:
    Evaluation(const ScenarioConfig& cfg, double p_tc, ModelOptions options = {});

    const ScenarioConfig& config() const { return cfg_; }
    double p_tc() const { return p_tc_; }
    const ModelOptions& options() const { return options_; }
    const DerivedQuantities& derived() const { return derived_; }
    const AssociationModel& association() const { return assoc_; }
    const BatteryChain& chain() const { return chain_; }
    double rho_m() const { return rho_m_; }
    double cond_high() const { return 1.0 / (1.0 + rho_m_); }
    const ConditionalCoverage& cond_low(Tier tier) const { return cond_low_[tier_index(tier)]; }

    /// P_H A_k^h R_k^h + P_L A_k^l R_k^l
    double association_weighted(Tier tier) const;

private:
    ScenarioConfig cfg_;
    double p_tc_;
    ModelOptions options_;
    DerivedQuantities derived_;
    AssociationModel assoc_;
    BatteryChain chain_;
    double rho_m_;
    std::array<ConditionalCoverage, 2> cond_low_;
};

RateCoverageBreakdown rate_coverage(const ScenarioConfig& cfg, double p_tc, const ModelOptions& options = {});

/// Association-distance law: piecewise densities c r e^{-s r^2} plus an
/// optional atom.
struct DistancePiece {
    double lo;
    double hi;  ///< may be +inf
    double coefficient;
    double rate;
};

class AssociationDistancePdf {
public:
    AssociationDistancePdf(std::vector<DistancePiece> pieces, double atom_location, double atom_weight);

    double density(double r) const;
    /// P(R <= r), atom included once r >= atom_location.
    double cdf(double r) const;
    /// P(R < r): the atom is excluded at r == atom_location.
    double cdf_left(double r) const;
    double atom_location() const { return atom_location_; }
    double atom_weight() const { return atom_weight_; }
    const std::vector<DistancePiece>& pieces() const { return pieces_; }
    /// Closed-form total mass (densities plus atom).
    double total_mass() const;

private:
    std::vector<DistancePiece> pieces_;
    double atom_location_;
    double atom_weight_;
};

AssociationDistancePdf assoc_distance_pdf(const ScenarioConfig& cfg, double p_tc, Tier tier, UserClass cls);

} // namespace san::analytic
