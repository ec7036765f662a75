#include "dczip/inference.hpp"

#include "dczip/zip.hpp"
#include "pair_cache.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dczip {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kDenGuard = 1e-12;

void add_warning(std::vector<std::string>* warnings, std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
}

double clamped_rate(double rate) { return rate < kRateFloor ? kRateFloor : rate; }

// log f_ab(0) = log(p + (1-p)e^{-r}), finite for all p in [0,1], r >= 0.
double zip_log_zero(double p, double r) {
    if (p == 0.0) return -r;
    if (p == 1.0) return 0.0;
    const double la = std::log(p);
    const double lb = std::log1p(-p) - r;
    const double m = std::max(la, lb);
    return m + std::log(std::exp(la - m) + std::exp(lb - m));
}

// alpha = p / (p + (1-p)e^{-r}) for an observed zero.
double alpha_zero(double p, double r) {
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    return 1.0 / (1.0 + std::exp(std::log1p(-p) - std::log(p) - r));
}

struct ParamTables {
    Matrix L1;       // log(1 - p_ab), -inf at p = 1
    Matrix LamC;     // max(lambda_ab, floor)
    Matrix LLc;      // log(LamC)
    double lam_min = 0.0;
    bool any_p_one = false;

    explicit ParamTables(const BlockParams& params) {
        const int K = params.K;
        L1.resize(K, K);
        LLc.resize(K, K);
        LamC.resize(K, K);
        lam_min = params.Lambda.minCoeff();
        for (int a = 0; a < K; ++a) {
            for (int b = 0; b < K; ++b) {
                const double p = params.P(a, b);
                any_p_one |= (p >= 1.0);
                L1(a, b) = p >= 1.0 ? kNegInf : std::log1p(-p);
                LamC(a, b) = clamped_rate(params.Lambda(a, b));
                LLc(a, b) = std::log(LamC(a, b));
            }
        }
    }
};

// S_ia = sum_{j != i} sum_b tau_jb log f_ab(A_ij). Shared by the E-step
// update and the ELBO. Terms with tau_jb = 0 contribute zero even when the
// log-pmf is -inf.
Matrix logf_row_sums(const detail::PairCache& pc, const Matrix& T, const BlockParams& params) {
    const int n = pc.n;
    const int K = params.K;
    Matrix S = Matrix::Zero(n, K);
    const ParamTables tab(params);

    if (!params.degree_corrected) {
        // Unit corrections: the zero-pair log-pmf is a per-block constant.
        Matrix G(K, K);
        for (int a = 0; a < K; ++a) {
            for (int b = 0; b < K; ++b) G(a, b) = zip_log_zero(params.P(a, b), tab.LamC(a, b));
        }
        Eigen::RowVectorXd colsum = T.colwise().sum();
        Matrix Tz = (-T).rowwise() + colsum;  // sum_{j != i} tau_jb before removing positives
        for (std::size_t p = 0; p < pc.n_pos(); ++p) {
            Tz.row(pc.pos_i[p]) -= T.row(pc.pos_j[p]);
        }
        S.noalias() = Tz * G.transpose();

        if (!tab.any_p_one) {
            const Matrix M0 = tab.L1 - tab.LamC;
            Vector va(K);
            for (std::size_t p = 0; p < pc.n_pos(); ++p) {
                va.noalias() = M0 * T.row(pc.pos_j[p]).transpose();
                va.noalias() += pc.pos_w[p] * (tab.LLc * T.row(pc.pos_j[p]).transpose());
                S.row(pc.pos_i[p]) += va.transpose();
                S.row(pc.pos_i[p]).array() -= pc.pos_lgw[p];
            }
        } else {
            for (std::size_t p = 0; p < pc.n_pos(); ++p) {
                const int i = pc.pos_i[p], j = pc.pos_j[p];
                const auto w = static_cast<std::int64_t>(pc.pos_w[p]);
                for (int a = 0; a < K; ++a) {
                    double acc = 0.0;
                    for (int b = 0; b < K; ++b) {
                        const double t = T(j, b);
                        if (t == 0.0) continue;
                        acc += t * zip_log_pmf(w, params.P(a, b), params.Lambda(a, b));
                    }
                    S(i, a) += acc;
                }
            }
        }
        return S;
    }

    // Degree-corrected path. Zero pairs are handled per block pair with
    // vectorized exp/log over the whole zero list.
    const auto nz = static_cast<Eigen::Index>(pc.n_zero());
    Eigen::ArrayXd m_zero(nz);
    for (Eigen::Index p = 0; p < nz; ++p) {
        m_zero[p] = params.mu(pc.zero_i[static_cast<std::size_t>(p)]) *
                    params.nu(pc.zero_j[static_cast<std::size_t>(p)]);
    }
    Eigen::ArrayXd t_buf(nz);
    for (int a = 0; a < K; ++a) {
        for (int b = 0; b < K; ++b) {
            const double p_ab = params.P(a, b);
            const double lam = params.Lambda(a, b);
            if (p_ab == 1.0) continue;  // log f(0) = 0
            if (p_ab == 0.0) {
                t_buf = -(m_zero * lam).max(kRateFloor);
            } else {
                t_buf = (p_ab + (1.0 - p_ab) * (-(m_zero * lam).max(kRateFloor)).exp()).log();
            }
            for (Eigen::Index p = 0; p < nz; ++p) {
                S(pc.zero_i[static_cast<std::size_t>(p)], a) +=
                    T(pc.zero_j[static_cast<std::size_t>(p)], b) * t_buf[p];
            }
        }
    }

    // Positive pairs: one log per pair on the fast path; the scalar zip path
    // covers rate-floor clamping and p = 1 blocks exactly.
    const double m_fast_min =
        tab.lam_min > 0.0 ? kRateFloor / tab.lam_min : std::numeric_limits<double>::infinity();
    Vector va(K);
    for (std::size_t p = 0; p < pc.n_pos(); ++p) {
        const int i = pc.pos_i[p], j = pc.pos_j[p];
        const double w = pc.pos_w[p];
        const double m = params.mu(i) * params.nu(j);
        if (!tab.any_p_one && m >= m_fast_min) {
            va.noalias() = (tab.L1 + w * tab.LLc - m * params.Lambda) * T.row(j).transpose();
            S.row(i) += va.transpose();
            S.row(i).array() += w * std::log(m) - pc.pos_lgw[p];
        } else {
            const auto wi = static_cast<std::int64_t>(w);
            for (int a = 0; a < K; ++a) {
                double acc = 0.0;
                for (int b = 0; b < K; ++b) {
                    const double t = T(j, b);
                    if (t == 0.0) continue;
                    acc += t * zip_log_pmf(wi, params.P(a, b), m * params.Lambda(a, b));
                }
                S(i, a) += acc;
            }
        }
    }
    return S;
}

Vector log_pi(const BlockParams& params) {
    Vector lp(params.K);
    for (int a = 0; a < params.K; ++a) {
        lp(a) = params.pi(a) > 0.0 ? std::log(params.pi(a)) : kNegInf;
    }
    return lp;
}

// One synchronous fixed-point pass; returns the max-abs tau change.
double e_step_pass(const detail::PairCache& pc, Matrix& T, const BlockParams& params,
                   const Vector& lpi, double damping, std::vector<std::string>* warnings) {
    const int n = pc.n;
    const int K = params.K;
    Matrix L = logf_row_sums(pc, T, params);
    L.rowwise() += lpi.transpose();
    Matrix Tnew(n, K);
    for (int i = 0; i < n; ++i) {
        const double mx = L.row(i).maxCoeff();
        if (!std::isfinite(mx)) {
            add_warning(warnings,
                        "e_step: node " + std::to_string(i) +
                            " has zero likelihood in every community; row reset to uniform");
            Tnew.row(i).setConstant(1.0 / K);
            continue;
        }
        const double lse = mx + std::log((L.row(i).array() - mx).exp().sum());
        Eigen::RowVectorXd logrow = (L.row(i).array() - lse).matrix();
        if (damping < 1.0) {
            for (int a = 0; a < K; ++a) {
                const double lt = T(i, a) > 0.0 ? std::log(T(i, a)) : kNegInf;
                logrow(a) = damping * logrow(a) + (1.0 - damping) * lt;
            }
            const double m2 = logrow.maxCoeff();
            logrow.array() -= m2 + std::log((logrow.array() - m2).exp().sum());
        }
        Tnew.row(i) = logrow.array().exp().max(kTauFloor).matrix();
        Tnew.row(i) /= Tnew.row(i).sum();
    }
    const double delta = (Tnew - T).cwiseAbs().maxCoeff();
    T = std::move(Tnew);
    return delta;
}

VariationalState e_step_impl(const detail::PairCache& pc, const VariationalState& tau,
                             const BlockParams& params, const FitOptions& opts, double damping,
                             std::vector<std::string>* warnings) {
    Matrix T = tau.tau;
    const Vector lpi = log_pi(params);
    bool converged = false;
    for (int it = 0; it < opts.estep_max_iters; ++it) {
        if (e_step_pass(pc, T, params, lpi, damping, warnings) < opts.estep_tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        add_warning(warnings, "e_step: fixed point not converged within " +
                                  std::to_string(opts.estep_max_iters) + " iterations");
    }
    return VariationalState{std::move(T)};
}

double elbo_impl(const detail::PairCache& pc, const VariationalState& tau,
                 const BlockParams& params) {
    const Matrix S = logf_row_sums(pc, tau.tau, params);
    const Vector lpi = log_pi(params);
    double total = 0.0;
    for (int i = 0; i < pc.n; ++i) {
        for (int a = 0; a < params.K; ++a) {
            const double t = tau.tau(i, a);
            if (t == 0.0) continue;  // 0 log 0 = 0 and 0 * (-inf) = 0
            const double term = S(i, a) + lpi(a) - std::log(t);
            if (term == kNegInf) return kNegInf;
            total += t * term;
        }
    }
    return total;
}

// Index groups over which a block update's numerator and denominator are
// pooled before dividing.
std::vector<std::vector<std::pair<int, int>>> pooling_groups(int K, bool symmetric,
                                                             bool global_pool) {
    std::vector<std::vector<std::pair<int, int>>> groups;
    if (global_pool) {
        groups.emplace_back();
        for (int a = 0; a < K; ++a) {
            for (int b = 0; b < K; ++b) groups.back().emplace_back(a, b);
        }
        return groups;
    }
    if (symmetric) {
        for (int a = 0; a < K; ++a) {
            for (int b = a; b < K; ++b) {
                groups.push_back({{a, b}});
                if (a != b) groups.back().emplace_back(b, a);
            }
        }
        return groups;
    }
    for (int a = 0; a < K; ++a) {
        for (int b = 0; b < K; ++b) groups.push_back({{a, b}});
    }
    return groups;
}

// Pooled division with the empty-block guard: groups whose denominator is
// below the guard keep their previous entries.
void pooled_update(const Matrix& num, const Matrix& den,
                   const std::vector<std::vector<std::pair<int, int>>>& groups, double lo,
                   double hi, const char* what, Matrix& out, std::vector<std::string>* warnings) {
    for (const auto& group : groups) {
        double num_sum = 0.0, den_sum = 0.0;
        for (auto [a, b] : group) {
            num_sum += num(a, b);
            den_sum += den(a, b);
        }
        if (den_sum < kDenGuard) {
            add_warning(warnings, std::string("ecm_m_step: empty effective block for ") + what +
                                      "; previous value retained");
            continue;
        }
        const double value = std::min(hi, std::max(lo, num_sum / den_sum));
        for (auto [a, b] : group) out(a, b) = value;
    }
}

// Naive re-accumulation of the strength-matching denominator (mu side when
// out_side, nu side otherwise), with alpha recomputed from the sweep-start
// snapshot. Used only for identity diagnostics.
double strength_identity_err(const detail::PairCache& pc, const Matrix& T, const Matrix& Psnap,
                             const Matrix& Lsnap, const Vector& mu_alpha, const Vector& nu_alpha,
                             const Matrix& lambda_new, const Vector& weight_vec,
                             const Vector& values, const Vector& observed, bool out_side) {
    const int n = pc.n;
    const int K = static_cast<int>(T.cols());
    const Matrix& W = *pc.W;
    double worst = 0.0;
    for (int node = 0; node < n; ++node) {
        if (observed(node) == 0.0) continue;  // value fixed to zero by construction
        double den = 0.0;
        for (int other = 0; other < n; ++other) {
            if (other == node) continue;
            const int i = out_side ? node : other;
            const int j = out_side ? other : node;
            const bool pair_zero = W(i, j) == 0.0;
            for (int a = 0; a < K; ++a) {
                for (int b = 0; b < K; ++b) {
                    double al = 0.0;
                    if (pair_zero) {
                        al = alpha_zero(Psnap(a, b),
                                        clamped_rate(mu_alpha(i) * nu_alpha(j) * Lsnap(a, b)));
                    }
                    den += T(i, a) * T(j, b) * weight_vec(other) * lambda_new(a, b) * (1.0 - al);
                }
            }
        }
        const double resid =
            std::abs(values(node) * den - observed(node)) / std::max(1.0, observed(node));
        worst = std::max(worst, resid);
    }
    return worst;
}

}  // namespace

void VariationalState::validate() const {
    if (tau.rows() < 1 || tau.cols() < 1) {
        throw std::invalid_argument("VariationalState: tau must be non-empty");
    }
    for (Eigen::Index i = 0; i < tau.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index a = 0; a < tau.cols(); ++a) {
            if (!(tau(i, a) >= 0.0)) {
                throw std::invalid_argument("VariationalState: entries must be >= 0");
            }
            row += tau(i, a);
        }
        if (std::abs(row - 1.0) > 1e-12) {
            throw std::invalid_argument("VariationalState: row " + std::to_string(i) +
                                        " does not sum to 1 within 1e-12");
        }
    }
}

void FitOptions::validate() const {
    if (max_outer_iters < 1 || estep_max_iters < 1 || ecm_max_iters < 1) {
        throw std::invalid_argument("FitOptions: iteration caps must be >= 1");
    }
    if (!(elbo_tol > 0.0) || !(estep_tol > 0.0) || !(ecm_tol > 0.0)) {
        throw std::invalid_argument("FitOptions: tolerances must be positive");
    }
}

double compute_alpha(std::int64_t a_ij, double p_ab, double rate) {
    if (a_ij < 0) throw std::invalid_argument("compute_alpha: a_ij must be >= 0");
    if (!(p_ab >= 0.0 && p_ab <= 1.0)) {
        throw std::invalid_argument("compute_alpha: p must lie in [0, 1]");
    }
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("compute_alpha: rate must be finite and >= 0");
    }
    if (a_ij > 0) return 0.0;
    return alpha_zero(p_ab, clamped_rate(rate));
}

VariationalState tau_from_partition(const Partition& init, int K) {
    if (K < 1) throw std::invalid_argument("tau_from_partition: K must be >= 1");
    for (int l : init.labels) {
        if (l < 1 || l > K) {
            throw std::invalid_argument("tau_from_partition: label " + std::to_string(l) +
                                        " outside 1.." + std::to_string(K));
        }
    }
    Matrix T = Matrix::Zero(init.n(), K);
    for (int i = 0; i < init.n(); ++i) T(i, init.labels[static_cast<std::size_t>(i)] - 1) = 1.0;
    T = T.cwiseMax(kTauFloor);
    for (int i = 0; i < init.n(); ++i) T.row(i) /= T.row(i).sum();
    return VariationalState{std::move(T)};
}

Partition hard_assign(const VariationalState& tau) {
    const int n = tau.n();
    const int K = tau.K();
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int a = 1; a < K; ++a) {
            if (tau.tau(i, a) > tau.tau(i, best)) best = a;  // ties keep the smaller index
        }
        labels[static_cast<std::size_t>(i)] = best + 1;
    }
    return Partition(std::move(labels), K);
}

Vector update_pi(const VariationalState& tau) {
    return tau.tau.colwise().mean().transpose();
}

VariationalState e_step(const WeightedDigraph& A, const VariationalState& tau,
                        const BlockParams& params, const FitOptions& opts, double damping,
                        std::vector<std::string>* warnings) {
    if (tau.n() != A.n() || tau.K() != params.K || params.n() != A.n()) {
        throw std::invalid_argument("e_step: dimension mismatch");
    }
    if (!(damping > 0.0 && damping <= 1.0)) {
        throw std::invalid_argument("e_step: damping must lie in (0, 1]");
    }
    detail::PairCache pc(A);
    return e_step_impl(pc, tau, params, opts, damping, warnings);
}

double elbo(const WeightedDigraph& A, const VariationalState& tau, const BlockParams& params) {
    if (tau.n() != A.n() || tau.K() != params.K || params.n() != A.n()) {
        throw std::invalid_argument("elbo: dimension mismatch");
    }
    detail::PairCache pc(A);
    return elbo_impl(pc, tau, params);
}

namespace detail {

BlockParams ecm_m_step_impl(const PairCache& pc, const VariationalState& tau,
                            const BlockParams& params_in, const FitOptions& opts,
                            std::vector<std::string>* warnings, EcmDiagnostics* diag) {
    const int n = pc.n;
    const int K = params_in.K;
    const Matrix& T = tau.tau;
    const bool dc = opts.degree_corrected;

    BlockParams params = params_in;
    params.sparsity_mode = opts.sparsity_mode;
    params.degree_corrected = dc;
    params.pi = update_pi(tau);

    // tau-only sufficient statistics, fixed across sweeps.
    Vector colsum = T.colwise().sum().transpose();
    Matrix D = colsum * colsum.transpose();
    D.noalias() -= T.transpose() * T;  // remove self pairs
    Matrix Wpos = Matrix::Zero(K, K);
    for (std::size_t p = 0; p < pc.n_pos(); ++p) {
        Wpos.noalias() += pc.pos_w[p] * (T.row(pc.pos_i[p]).transpose() * T.row(pc.pos_j[p]));
    }

    const auto p_groups =
        pooling_groups(K, opts.symmetric_blocks, opts.sparsity_mode == SparsityMode::global);
    const auto lam_groups = pooling_groups(K, opts.symmetric_blocks, false);

    const auto nz = static_cast<Eigen::Index>(pc.n_zero());
    Eigen::ArrayXd alpha_buf(nz);
    Eigen::ArrayXd m_zero(nz);
    std::vector<Matrix> node_tensor;

    if (diag) {
        diag->sweeps = 0;
        diag->converged = false;
    }

    for (int sweep = 0; sweep < opts.ecm_max_iters; ++sweep) {
        const Matrix Psnap = params.P;
        const Matrix Lsnap = params.Lambda;
        const Vector mu_snap = params.mu;
        const Vector nu_snap = params.nu;

        for (Eigen::Index p = 0; p < nz; ++p) {
            m_zero[p] = mu_snap(pc.zero_i[static_cast<std::size_t>(p)]) *
                        nu_snap(pc.zero_j[static_cast<std::size_t>(p)]);
        }

        // Pass 1 over zero pairs: alpha-weighted masses for P and Lambda plus
        // the per-node sums feeding the mu denominator.
        Matrix Z0 = Matrix::Zero(K, K);
        Matrix Zm = Matrix::Zero(K, K);
        if (dc) node_tensor.assign(static_cast<std::size_t>(n), Matrix::Zero(K, K));
        for (int a = 0; a < K; ++a) {
            for (int b = 0; b < K; ++b) {
                const double p_ab = Psnap(a, b);
                if (p_ab == 0.0) continue;  // alpha identically zero
                if (p_ab == 1.0) {
                    alpha_buf.setOnes();
                } else {
                    const double c = std::log1p(-p_ab) - std::log(p_ab);
                    alpha_buf = 1.0 / (1.0 + (c - (m_zero * Lsnap(a, b)).max(kRateFloor)).exp());
                }
                double z0 = 0.0, zm = 0.0;
                for (Eigen::Index p = 0; p < nz; ++p) {
                    const int i = pc.zero_i[static_cast<std::size_t>(p)];
                    const int j = pc.zero_j[static_cast<std::size_t>(p)];
                    const double al = alpha_buf[p];
                    const double mass = T(i, a) * T(j, b);
                    z0 += mass * al;
                    zm += mass * m_zero[p] * al;
                    if (dc) node_tensor[static_cast<std::size_t>(i)](a, b) += T(j, b) * nu_snap(j) * al;
                }
                Z0(a, b) = z0;
                Zm(a, b) = zm;
            }
        }

        pooled_update(Z0, D, p_groups, 0.0, kMaxStructuralZeroProb, "p", params.P, warnings);

        // Lambda: positive-pair numerator (alpha = 0 there); denominator is the
        // mu-nu weighted pair mass minus the alpha-weighted zero mass.
        Vector u = T.transpose() * mu_snap;
        Vector v = T.transpose() * nu_snap;
        Matrix Mfull = u * v.transpose();
        Mfull.noalias() -=
            T.transpose() * (mu_snap.array() * nu_snap.array()).matrix().asDiagonal() * T;
        const Matrix Lden = (Mfull - Zm).cwiseMax(0.0);
        pooled_update(Wpos, Lden, lam_groups, kRateFloor, std::numeric_limits<double>::infinity(),
                      "lambda", params.Lambda, warnings);

        if (dc) {
            // mu at the new Lambda and previous nu.
            Vector tau_nu = T.transpose() * nu_snap;
            Vector mu_new(n);
            for (int i = 0; i < n; ++i) {
                if (pc.row_sum(i) == 0.0) {
                    mu_new(i) = 0.0;  // zero out-strength: kept at zero, not floored
                    continue;
                }
                double den = 0.0;
                for (int a = 0; a < K; ++a) {
                    double inner = 0.0;
                    for (int b = 0; b < K; ++b) {
                        inner += params.Lambda(a, b) *
                                 (tau_nu(b) - T(i, b) * nu_snap(i) -
                                  node_tensor[static_cast<std::size_t>(i)](a, b));
                    }
                    den += T(i, a) * inner;
                }
                if (den < kDenGuard) {
                    add_warning(warnings, "ecm_m_step: mu denominator underflow at node " +
                                              std::to_string(i) + "; previous value retained");
                    mu_new(i) = mu_snap(i);
                } else {
                    mu_new(i) = pc.row_sum(i) / den;
                }
            }
            if (diag && diag->check_identities) {
                diag->max_mu_identity_rel_err = std::max(
                    diag->max_mu_identity_rel_err,
                    strength_identity_err(pc, T, Psnap, Lsnap, mu_snap, nu_snap, params.Lambda,
                                          nu_snap, mu_new, pc.row_sum, /*out_side=*/true));
            }
            params.mu = mu_new;

            // Pass 2 over zero pairs for nu (uses the new mu; alpha unchanged).
            std::vector<Matrix> nu_tensor(static_cast<std::size_t>(n), Matrix::Zero(K, K));
            for (int a = 0; a < K; ++a) {
                for (int b = 0; b < K; ++b) {
                    const double p_ab = Psnap(a, b);
                    if (p_ab == 0.0) continue;
                    if (p_ab == 1.0) {
                        alpha_buf.setOnes();
                    } else {
                        const double c = std::log1p(-p_ab) - std::log(p_ab);
                        alpha_buf =
                            1.0 / (1.0 + (c - (m_zero * Lsnap(a, b)).max(kRateFloor)).exp());
                    }
                    for (Eigen::Index p = 0; p < nz; ++p) {
                        const int i = pc.zero_i[static_cast<std::size_t>(p)];
                        const int j = pc.zero_j[static_cast<std::size_t>(p)];
                        nu_tensor[static_cast<std::size_t>(j)](a, b) +=
                            T(i, a) * params.mu(i) * alpha_buf[p];
                    }
                }
            }
            Vector tau_mu = T.transpose() * params.mu;
            Vector nu_new(n);
            for (int j = 0; j < n; ++j) {
                if (pc.col_sum(j) == 0.0) {
                    nu_new(j) = 0.0;
                    continue;
                }
                double den = 0.0;
                for (int b = 0; b < K; ++b) {
                    double inner = 0.0;
                    for (int a = 0; a < K; ++a) {
                        inner += params.Lambda(a, b) *
                                 (tau_mu(a) - T(j, a) * params.mu(j) -
                                  nu_tensor[static_cast<std::size_t>(j)](a, b));
                    }
                    den += T(j, b) * inner;
                }
                if (den < kDenGuard) {
                    add_warning(warnings, "ecm_m_step: nu denominator underflow at node " +
                                              std::to_string(j) + "; previous value retained");
                    nu_new(j) = nu_snap(j);
                } else {
                    nu_new(j) = pc.col_sum(j) / den;
                }
            }
            if (diag && diag->check_identities) {
                diag->max_nu_identity_rel_err = std::max(
                    diag->max_nu_identity_rel_err,
                    strength_identity_err(pc, T, Psnap, Lsnap, mu_snap, nu_snap, params.Lambda,
                                          params.mu, nu_new, pc.col_sum, /*out_side=*/false));
            }
            params.nu = nu_new;

            // Identifiability: mean-one corrections, Lambda absorbs the scale.
            const double mu_mean = params.mu.mean();
            if (mu_mean > 0.0) {
                params.mu /= mu_mean;
                params.Lambda *= mu_mean;
            } else {
                add_warning(warnings, "ecm_m_step: all mu collapsed to zero; rescale skipped");
            }
            const double nu_mean = params.nu.mean();
            if (nu_mean > 0.0) {
                params.nu /= nu_mean;
                params.Lambda *= nu_mean;
            } else {
                add_warning(warnings, "ecm_m_step: all nu collapsed to zero; rescale skipped");
            }
        }

        if (diag) diag->sweeps = sweep + 1;

        double rel = 0.0;
        for (int a = 0; a < K; ++a) {
            for (int b = 0; b < K; ++b) {
                rel = std::max(rel, std::abs(params.P(a, b) - Psnap(a, b)) /
                                        (std::abs(Psnap(a, b)) + kDenGuard));
                rel = std::max(rel, std::abs(params.Lambda(a, b) - Lsnap(a, b)) /
                                        (std::abs(Lsnap(a, b)) + kDenGuard));
            }
        }
        if (dc) {
            for (int i = 0; i < n; ++i) {
                rel = std::max(rel, std::abs(params.mu(i) - mu_snap(i)) /
                                        (std::abs(mu_snap(i)) + kDenGuard));
                rel = std::max(rel, std::abs(params.nu(i) - nu_snap(i)) /
                                        (std::abs(nu_snap(i)) + kDenGuard));
            }
        }
        if (rel < opts.ecm_tol) {
            if (diag) diag->converged = true;
            break;
        }
    }
    return params;
}

// Moment-matching bootstrap for (P, Lambda) from a fresh tau: lambda from the
// tau-weighted mean of positive weights, p from the tau-weighted zero fraction
// corrected for Poisson zeros.
BlockParams bootstrap_params(const PairCache& pc, const VariationalState& tau,
                             const FitOptions& opts) {
    const int K = tau.K();
    const Matrix& T = tau.tau;
    BlockParams params;
    params.K = K;
    params.pi = update_pi(tau);
    params.mu = Vector::Ones(pc.n);
    params.nu = Vector::Ones(pc.n);
    params.degree_corrected = opts.degree_corrected;
    params.sparsity_mode = opts.sparsity_mode;
    params.P = Matrix::Zero(K, K);
    params.Lambda = Matrix::Ones(K, K);

    Vector colsum = T.colwise().sum().transpose();
    Matrix D = colsum * colsum.transpose();
    D.noalias() -= T.transpose() * T;
    Matrix Wpos = Matrix::Zero(K, K);
    Matrix PosMass = Matrix::Zero(K, K);
    for (std::size_t p = 0; p < pc.n_pos(); ++p) {
        const Matrix outer = T.row(pc.pos_i[p]).transpose() * T.row(pc.pos_j[p]);
        Wpos.noalias() += pc.pos_w[p] * outer;
        PosMass.noalias() += outer;
    }

    for (const auto& group : pooling_groups(K, opts.symmetric_blocks, false)) {
        double wsum = 0.0, mass = 0.0;
        for (auto [a, b] : group) {
            wsum += Wpos(a, b);
            mass += PosMass(a, b);
        }
        const double lam = mass > kDenGuard ? wsum / mass : 1.0;
        for (auto [a, b] : group) params.Lambda(a, b) = std::max(lam, kRateFloor);
    }
    for (const auto& group :
         pooling_groups(K, opts.symmetric_blocks, opts.sparsity_mode == SparsityMode::global)) {
        double pair_mass = 0.0, pos_mass = 0.0, lam_num = 0.0, lam_den = 0.0;
        for (auto [a, b] : group) {
            pair_mass += D(a, b);
            pos_mass += PosMass(a, b);
            lam_num += Wpos(a, b);
            lam_den += PosMass(a, b);
        }
        if (pair_mass < kDenGuard) continue;
        const double z0 = 1.0 - pos_mass / pair_mass;
        const double lam = lam_den > kDenGuard ? lam_num / lam_den : 1.0;
        const double pz = std::exp(-lam);
        double p = pz < 1.0 ? (z0 - pz) / (1.0 - pz) : 0.0;
        p = std::min(kMaxStructuralZeroProb, std::max(0.0, p));
        for (auto [a, b] : group) params.P(a, b) = p;
    }
    return params;
}

}  // namespace detail

BlockParams ecm_m_step(const WeightedDigraph& A, const VariationalState& tau,
                       const BlockParams& params_in, const FitOptions& opts,
                       std::vector<std::string>* warnings, EcmDiagnostics* diag) {
    if (tau.n() != A.n() || tau.K() != params_in.K || params_in.n() != A.n()) {
        throw std::invalid_argument("ecm_m_step: dimension mismatch");
    }
    opts.validate();
    detail::PairCache pc(A);
    return detail::ecm_m_step_impl(pc, tau, params_in, opts, warnings, diag);
}

FitResult fit_vem(const WeightedDigraph& A, int K, const Partition& init, const FitOptions& opts,
                  EcmDiagnostics* diag) {
    opts.validate();
    if (K < 1) throw std::invalid_argument("fit_vem: K must be >= 1");
    if (init.n() != A.n()) throw std::invalid_argument("fit_vem: init size does not match graph");
    if (init.K != K) throw std::invalid_argument("fit_vem: init must carry exactly K communities");
    init.validate();

    detail::PairCache pc(A);
    FitResult res;
    res.options = opts;
    VariationalState tau = tau_from_partition(init, K);
    BlockParams params = detail::bootstrap_params(pc, tau, opts);

    res.elbo_init = elbo_impl(pc, tau, params);
    VariationalState best_tau = tau;
    BlockParams best_params = params;
    double best_el = res.elbo_init;
    double prev_el = res.elbo_init;
    std::vector<bool> warned_comm(static_cast<std::size_t>(K), false);
    bool converged = false;

    for (int t = 1; t <= opts.max_outer_iters; ++t) {
        VariationalState tau_new = e_step_impl(pc, tau, params, opts, 1.0, &res.warnings);
        double el_e = elbo_impl(pc, tau_new, params);
        if (el_e < prev_el - 1e-6) {
            res.warnings.push_back("fit_vem: ELBO dropped across the E-step at outer iteration " +
                                   std::to_string(t) + "; retried with damping 0.5");
            VariationalState tau_damp = e_step_impl(pc, tau, params, opts, 0.5, &res.warnings);
            const double el_d = elbo_impl(pc, tau_damp, params);
            if (el_d > el_e) {
                tau_new = std::move(tau_damp);
                el_e = el_d;
            }
        }
        tau = std::move(tau_new);

        for (int a = 0; a < K; ++a) {
            if (tau.tau.col(a).sum() < 1e-8 && !warned_comm[static_cast<std::size_t>(a)]) {
                warned_comm[static_cast<std::size_t>(a)] = true;
                res.warnings.push_back("fit_vem: community " + std::to_string(a + 1) +
                                       " responsibility mass below 1e-8");
            }
        }

        params = detail::ecm_m_step_impl(pc, tau, params, opts, &res.warnings, diag);
        const double el = elbo_impl(pc, tau, params);
        res.min_mstep_gain = std::min(res.min_mstep_gain, el - el_e);
        res.elbo_trace.push_back(el);
        if (el > best_el) {
            best_el = el;
            best_tau = tau;
            best_params = params;
        }
        if (std::abs(el - prev_el) < opts.elbo_tol) {
            converged = true;
            break;
        }
        prev_el = el;
    }

    // Collapse duplicate warnings, keeping first occurrences in order.
    std::vector<std::string> unique_warnings;
    for (auto& w : res.warnings) {
        if (std::find(unique_warnings.begin(), unique_warnings.end(), w) == unique_warnings.end()) {
            unique_warnings.push_back(std::move(w));
        }
    }
    res.warnings = std::move(unique_warnings);

    res.converged = converged;
    res.outer_iters = static_cast<int>(res.elbo_trace.size());
    res.params = std::move(best_params);
    res.tau = std::move(best_tau);
    res.best_elbo = best_el;
    res.partition = hard_assign(res.tau);
    return res;
}

}  // namespace dczip
