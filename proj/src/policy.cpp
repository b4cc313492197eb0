#include "mshift/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mshift/errors.hpp"
#include "mshift/objective.hpp"

namespace mshift::policy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class FiniteModel final : public CarrierModel {
public:
    FiniteModel(std::vector<oracle::Alternative> alts, double phi)
        : alts_(std::move(alts)), phi_(phi) {
        if (alts_.empty()) throw InvalidInstanceError("finite model needs at least one alternative");
        if (!(phi_ > 0.0)) throw InvalidInstanceError("phi must be positive");
    }
    int n_scenarios() const override { return 1; }
    double phi() const override { return phi_; }
    Response solve(int scenario, const Policy& p) override {
        if (scenario != 0) throw InvalidInstanceError("finite model has a single scenario");
        const oracle::ArgminResult r = oracle::finite_argmin(alts_, phi_, p);
        Response resp;
        resp.distance = alts_[static_cast<std::size_t>(r.index)].distance;
        resp.flow_cost = alts_[static_cast<std::size_t>(r.index)].flow_cost;
        resp.cost = r.cost;
        return resp;
    }

private:
    std::vector<oracle::Alternative> alts_;
    double phi_;
};

class InstanceModel final : public CarrierModel {
public:
    InstanceModel(std::vector<Instance> scenarios, const SolverConfig& cfg)
        : scenarios_(std::move(scenarios)), cfg_(cfg) {
        if (scenarios_.empty()) throw InvalidInstanceError("model needs at least one scenario");
        phi_ = scenarios_.front().phi;
        for (const auto& s : scenarios_)
            if (s.phi != phi_) throw InvalidInstanceError("scenarios disagree on phi");
        warm_.resize(scenarios_.size());
        evals_.assign(scenarios_.size(), 0);
    }
    int n_scenarios() const override { return static_cast<int>(scenarios_.size()); }
    double phi() const override { return phi_; }
    Response solve(int scenario, const Policy& p) override {
        if (scenario < 0 || scenario >= n_scenarios())
            throw InvalidInstanceError("scenario index out of range");
        const auto si = static_cast<std::size_t>(scenario);
        const Instance& inst = scenarios_[si];

        Solution sol;
        if (cfg_.kind == SolverKind::Exact) {
            sol = oracle::enumerate_optimal(inst, p);
        } else {
            alns::AlnsParams params = cfg_.alns;
            params.seed = derive_seed(cfg_.seed, static_cast<std::uint64_t>(scenario),
                                      static_cast<std::uint64_t>(evals_[si]));
            const Solution* ws =
                (cfg_.chain_warm_starts && warm_[si]) ? &*warm_[si] : nullptr;
            sol = alns::solve(inst, p, params, ws).best;
        }
        ++evals_[si];
        if (cfg_.chain_warm_starts) warm_[si] = sol;

        Response resp;
        resp.distance = sol.total_distance;
        resp.flow_cost = sol.total_flow_cost;
        resp.cost = policy_cost(inst.phi, p, sol.total_distance, sol.total_flow_cost);
        resp.modal_shift = modal_shift(sol);
        resp.modal_shift_demand = modal_shift_by_demand(inst, sol);
        resp.vehicles = vehicles_used(sol);
        resp.max_load = max_load(sol);
        resp.solution = std::move(sol);
        return resp;
    }

private:
    std::vector<Instance> scenarios_;
    SolverConfig cfg_;
    double phi_ = 1.0;
    std::vector<std::optional<Solution>> warm_;
    std::vector<long long> evals_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

std::unique_ptr<CarrierModel> make_instance_model(std::vector<Instance> scenarios,
                                                  const SolverConfig& cfg) {
    return std::make_unique<InstanceModel>(std::move(scenarios), cfg);
}

std::unique_ptr<CarrierModel> make_finite_model(std::vector<oracle::Alternative> alts, double phi) {
    return std::make_unique<FiniteModel>(std::move(alts), phi);
}

PolicyOutcome evaluate_policy(CarrierModel& model, const Policy& p) {
    if (!p.valid()) throw InvalidInstanceError("policy out of range: subsidy in [0,1], tax >= 0");
    const int n = model.n_scenarios();
    if (n <= 0) throw InvalidInstanceError("model has no scenarios");

    PolicyOutcome out;
    out.policy = p;
    out.per_scenario.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        try {
            out.per_scenario.push_back(model.solve(i, p));
        } catch (const InfeasibleError& e) {
            throw InfeasibleError("scenario " + std::to_string(i) + ": " + e.what());
        }
    }
    for (const auto& r : out.per_scenario) {
        out.avg_distance += r.distance;
        out.avg_flow += r.flow_cost;
        out.avg_cost += r.cost;
        out.modal_shift += r.modal_shift;
        out.modal_shift_demand += r.modal_shift_demand;
        out.avg_vehicles += r.vehicles;
        out.avg_max_load += r.max_load;
    }
    const double inv = 1.0 / n;
    out.avg_distance *= inv;
    out.avg_flow *= inv;
    out.avg_cost *= inv;
    out.modal_shift *= inv;
    out.modal_shift_demand *= inv;
    out.avg_vehicles *= inv;
    out.avg_max_load *= inv;
    out.avg_realized_budget = realized_budget(model.phi(), p, out.avg_distance, out.avg_flow);
    return out;
}

double budget_gap(CarrierModel& model, double subsidy, double tax, double budget) {
    return evaluate_policy(model, Policy{subsidy, tax}).avg_realized_budget - budget;
}

OptimalPolicyResult optimal_policy(CarrierModel& model, double budget) {
    const PolicyOutcome full = evaluate_policy(model, Policy{1.0, 0.0});
    const double f_full = full.avg_flow;
    const double d_full = full.avg_distance;
    if (budget > f_full) {
        throw InfeasibleError("budget target " + fmt(budget) +
                              " exceeds the full-subsidy flow cost " + fmt(f_full) +
                              "; no nonnegative tax can balance it");
    }
    double tax = 0.0;
    if (budget < f_full) {
        if (d_full <= 0.0)
            throw InfeasibleError(
                "full-subsidy plan drives no distance, so no road tax can recover the "
                "subsidy outlay");
        tax = (f_full - budget) / (model.phi() * d_full);
    }
    OptimalPolicyResult res;
    res.policy = Policy{1.0, tax};
    res.outcome = evaluate_policy(model, res.policy);
    return res;
}

BisectionResult bisection_tax_search(CarrierModel& model, double subsidy, double budget,
                                     const BisectionOptions& opts) {
    if (subsidy < 0.0 || subsidy > 1.0) throw InvalidInstanceError("subsidy out of [0, 1]");
    if (opts.bracket_lo < 0.0 || !(opts.bracket_hi > opts.bracket_lo))
        throw InvalidInstanceError("tax bracket must satisfy 0 <= lo < hi");
    const double eps = opts.eps > 0.0 ? opts.eps : 1e-3 * std::max(1.0, std::abs(budget));

    struct GapEval {
        double gap = 0.0;
        PolicyOutcome outcome;
    };
    auto eval = [&](double tax) {
        GapEval g;
        g.outcome = evaluate_policy(model, Policy{subsidy, tax});
        g.gap = g.outcome.avg_realized_budget - budget;
        return g;
    };

    BisectionResult res;
    GapEval at_lo = eval(opts.bracket_lo);
    if (std::abs(at_lo.gap) <= eps) {
        res.converged = true;
        res.tax = opts.bracket_lo;
        res.outcome = std::move(at_lo.outcome);
        return res;
    }
    GapEval at_hi = eval(opts.bracket_hi);
    if (std::abs(at_hi.gap) <= eps) {
        res.converged = true;
        res.tax = opts.bracket_hi;
        res.outcome = std::move(at_hi.outcome);
        return res;
    }
    if ((at_lo.gap > 0.0) == (at_hi.gap > 0.0)) {
        res.failure = "no sign change over tax bracket [" + fmt(opts.bracket_lo) + ", " +
                      fmt(opts.bracket_hi) + "]: gap(lo)=" + fmt(at_lo.gap) +
                      ", gap(hi)=" + fmt(at_hi.gap);
        return res;
    }

    double lo = opts.bracket_lo, hi = opts.bracket_hi;
    double g_lo = at_lo.gap, g_hi = at_hi.gap;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        GapEval at_mid = eval(mid);
        res.steps.push_back({lo, hi, mid, g_lo, g_hi, at_mid.gap});
        res.iterations = it;
        if (std::abs(at_mid.gap) <= eps) {
            res.converged = true;
            res.tax = mid;
            res.outcome = std::move(at_mid.outcome);
            return res;
        }
        if ((at_mid.gap > 0.0) == (g_lo > 0.0)) {
            lo = mid;
            g_lo = at_mid.gap;
        } else {
            hi = mid;
            g_hi = at_mid.gap;
        }
    }
    res.tax = 0.5 * (lo + hi);
    res.failure = "no convergence after " + std::to_string(opts.max_iterations) +
                  " iterations; bracket [" + fmt(lo) + ", " + fmt(hi) + "], gap(lo)=" +
                  fmt(g_lo) + ", gap(hi)=" + fmt(g_hi);
    return res;
}

ParetoResult pareto_sweep(CarrierModel& model, const std::vector<double>& subsidy_grid,
                          const std::vector<double>& budgets, const BisectionOptions& opts) {
    if (subsidy_grid.empty() || budgets.empty())
        throw InvalidInstanceError("pareto sweep needs a nonempty subsidy grid and budget list");
    std::vector<double> grid = subsidy_grid;
    std::sort(grid.begin(), grid.end());
    for (double s : grid)
        if (s < 0.0 || s > 1.0) throw InvalidInstanceError("subsidy grid entry out of [0, 1]");

    ParetoResult res;
    for (double budget : budgets) {
        for (double s : grid) {
            if (s >= 1.0 - 1e-12) {
                try {
                    OptimalPolicyResult opt = optimal_policy(model, budget);
                    res.points.push_back({budget, std::move(opt.outcome)});
                } catch (const InfeasibleError& e) {
                    res.omitted.push_back({s, budget, e.what()});
                }
                continue;
            }
            BisectionResult bi = bisection_tax_search(model, s, budget, opts);
            if (bi.converged)
                res.points.push_back({budget, std::move(bi.outcome)});
            else
                res.omitted.push_back({s, budget, bi.failure});
        }
    }
    return res;
}

// ---- proposition suite --------------------------------------------------------

namespace {

// Carrier response used by the checks. With the negative control on, high
// subsidies return the runner-up instead of the argmin, mimicking a solver
// that degrades exactly where the closed-form policy relies on it.
int select_alt(const std::vector<oracle::Alternative>& alts, double phi, const Policy& p,
               bool corrupt) {
    const oracle::ArgminResult r = oracle::finite_argmin(alts, phi, p);
    if (!corrupt || alts.size() < 2 || p.subsidy < 0.9) return r.index;
    int second = -1;
    double best = kInf;
    for (int i = 0; i < static_cast<int>(alts.size()); ++i) {
        if (i == r.index) continue;
        const double c =
            policy_cost(phi, p, alts[static_cast<std::size_t>(i)].distance,
                        alts[static_cast<std::size_t>(i)].flow_cost);
        if (c < best) {
            best = c;
            second = i;
        }
    }
    return second;
}

std::string policy_str(const Policy& p) {
    return "(s=" + std::to_string(p.subsidy) + ", t=" + std::to_string(p.tax) + ")";
}

} // namespace

PropositionReport verify_propositions(const std::vector<oracle::Alternative>& alts, double phi,
                                      const PropositionOptions& opt) {
    if (alts.empty()) throw InvalidInstanceError("alternative set is empty");
    if (!(phi > 0.0)) throw InvalidInstanceError("phi must be positive");
    const bool nc = opt.negative_control;
    const int n = static_cast<int>(alts.size());

    PropositionReport rep;
    Rng rng(opt.seed);

    double f_min = kInf, f_max = 0.0, d_min = kInf;
    for (const auto& a : alts) {
        f_min = std::min(f_min, a.flow_cost);
        f_max = std::max(f_max, a.flow_cost);
        d_min = std::min(d_min, a.distance);
    }
    // One shared budget target per set: every policy pair below balances it.
    const double target = rng.next_real(0.0, 0.9 * f_min);
    const double t_span = d_min > 0.0 ? f_max / (phi * d_min) + 0.5 : 1.0;

    auto violate = [&](const char* check, const std::string& msg) {
        if (rep.violations.size() < 64) rep.violations.push_back({check, msg});
    };

    struct Sample {
        Policy p;
        int alt = -1;
        double cost = 0.0;
    };
    std::vector<Sample> pool;

    // Draws a policy whose realized budget equals the target exactly: pick an
    // alternative, size the tax so s f - t phi d = target, keep the draw only
    // when the carrier would indeed choose that alternative.
    auto draw_balanced = [&]() -> std::optional<Sample> {
        ++rep.samples_drawn;
        const double s = rng.next_real();
        const int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        const auto& alt = alts[static_cast<std::size_t>(i)];
        const double spend = s * alt.flow_cost;
        if (spend < target || alt.distance <= 0.0) return std::nullopt;
        const Policy p{s, (spend - target) / (phi * alt.distance)};
        if (select_alt(alts, phi, p, nc) != i) return std::nullopt;
        return Sample{p, i, policy_cost(phi, p, alt.distance, alt.flow_cost)};
    };

    // Closed-form full-subsidy plan as the upper level computes it (always from
    // the true argmin; a corrupted carrier shows up in the responses instead).
    const oracle::ArgminResult full = oracle::finite_argmin(alts, phi, Policy{1.0, 0.0});
    const double d_full = alts[static_cast<std::size_t>(full.index)].distance;
    const double f_full = alts[static_cast<std::size_t>(full.index)].flow_cost;

    const long long draw_cap = opt.min_feasible_trials * 2000 + 1000;
    while (rep.trials < opt.min_feasible_trials && rep.samples_drawn < draw_cap) {
        const auto a = draw_balanced();
        if (!a) continue;
        const auto b = draw_balanced();
        if (!b) continue;
        ++rep.trials;
        pool.push_back(*a);
        pool.push_back(*b);

        const auto& alt1 = alts[static_cast<std::size_t>(a->alt)];
        const auto& alt2 = alts[static_cast<std::size_t>(b->alt)];

        if (a->alt != b->alt) {
            const double tau = 1e-9 * std::max({1.0, std::abs(a->cost), std::abs(b->cost)});
            const bool d_less = alt1.distance < alt2.distance;
            if (d_less && a->cost < b->cost - tau)
                violate("prop1-shorter-distance-costs-more",
                        "d1 < d2 but C1 < C2 for " + policy_str(a->p) + " -> (d=" +
                            fmt(alt1.distance) + ", f=" + fmt(alt1.flow_cost) + ", C=" +
                            fmt(a->cost) + ") vs " + policy_str(b->p) + " -> (d=" +
                            fmt(alt2.distance) + ", f=" + fmt(alt2.flow_cost) + ", C=" +
                            fmt(b->cost) + ")");
            if (!d_less && a->cost > b->cost + tau)
                violate("prop1-shorter-distance-costs-more",
                        "d1 >= d2 but C1 > C2 for " + policy_str(a->p) + " vs " +
                            policy_str(b->p));
            if (d_less != (alt1.flow_cost > alt2.flow_cost))
                violate("lemma1-distance-flow-tradeoff",
                        "selected pairs are not antitone: (d=" + fmt(alt1.distance) + ", f=" +
                            fmt(alt1.flow_cost) + ") vs (d=" + fmt(alt2.distance) + ", f=" +
                            fmt(alt2.flow_cost) + ")");
        }

        {
            // tax monotonicity at a fixed subsidy, no budget involved
            const double s = rng.next_real();
            double t1 = rng.next_real(0.0, t_span);
            double t2 = rng.next_real(0.0, t_span);
            if (t2 < t1) std::swap(t1, t2);
            const int i1 = select_alt(alts, phi, Policy{s, t1}, nc);
            const int i2 = select_alt(alts, phi, Policy{s, t2}, nc);
            if (alts[static_cast<std::size_t>(i2)].distance >
                alts[static_cast<std::size_t>(i1)].distance + 1e-12)
                violate("prop2-distance-antitone-in-tax",
                        "raising the tax from " + fmt(t1) + " to " + fmt(t2) + " at s=" +
                            fmt(s) + " increased the distance from " +
                            fmt(alts[static_cast<std::size_t>(i1)].distance) + " to " +
                            fmt(alts[static_cast<std::size_t>(i2)].distance));
        }

        if (d_full > 0.0) {
            // budget-plus-cost invariance at full subsidy
            double b1 = rng.next_real(0.0, f_full);
            double b2 = rng.next_real(0.0, f_full);
            if (b2 < b1) std::swap(b1, b2);
            const Policy p1{1.0, (f_full - b1) / (phi * d_full)};
            const Policy p2{1.0, (f_full - b2) / (phi * d_full)};
            const int i1 = select_alt(alts, phi, p1, nc);
            const int i2 = select_alt(alts, phi, p2, nc);
            const double c1 =
                policy_cost(phi, p1, alts[static_cast<std::size_t>(i1)].distance,
                            alts[static_cast<std::size_t>(i1)].flow_cost);
            const double c2 =
                policy_cost(phi, p2, alts[static_cast<std::size_t>(i2)].distance,
                            alts[static_cast<std::size_t>(i2)].flow_cost);
            const double lhs = b1 + c1, rhs = b2 + c2;
            if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, std::abs(lhs)))
                violate("prop5-budget-plus-cost-invariant",
                        "B1+C1=" + fmt(lhs) + " but B2+C2=" + fmt(rhs) + " for B1=" +
                            fmt(b1) + ", B2=" + fmt(b2));
        }
    }

    // Full-subsidy closed form must reach the smallest sampled distance.
    if (!pool.empty() && f_full >= target && d_full > 0.0) {
        const double t_star = (f_full - target) / (phi * d_full);
        const Policy p_star{1.0, t_star};
        const int sel = select_alt(alts, phi, p_star, nc);
        const auto& chosen = alts[static_cast<std::size_t>(sel)];
        const double realized =
            realized_budget(phi, p_star, chosen.distance, chosen.flow_cost);
        if (std::abs(realized - target) > 1e-9 * std::max(1.0, std::abs(target)))
            violate("prop4-closed-form-balances-budget",
                    "closed-form tax " + fmt(t_star) + " realizes " + fmt(realized) +
                        " instead of " + fmt(target));
        double best_sampled = kInf;
        for (const auto& s : pool)
            best_sampled =
                std::min(best_sampled, alts[static_cast<std::size_t>(s.alt)].distance);
        if (chosen.distance > best_sampled + 1e-12)
            violate("prop4-closed-form-minimizes-distance",
                    "closed-form policy drives " + fmt(chosen.distance) +
                        " but a sampled balanced policy achieved " + fmt(best_sampled));
    }

    // Minimum achievable distance per subsidy level. A policy balances the
    // budget exactly when its tax is the root t = (s f - B) / (phi d) of the
    // alternative it selects, so scanning every alternative's root covers all
    // balanced taxes at once, at finer than any fixed grid step. The curve
    // must fall as the subsidy rises.
    {
        double prev_best = kInf;
        double prev_s = 0.0;
        bool have_prev = false;
        for (int step = 0; step <= 10; ++step) {
            const double s = 0.1 * step;
            double best_d = kInf;
            for (int i = 0; i < n; ++i) {
                const auto& alt = alts[static_cast<std::size_t>(i)];
                const double spend = s * alt.flow_cost;
                if (spend < target || alt.distance <= 0.0) continue;
                const Policy p{s, (spend - target) / (phi * alt.distance)};
                if (select_alt(alts, phi, p, nc) != i) continue;
                best_d = std::min(best_d, alt.distance);
            }
            if (best_d < kInf) {
                if (have_prev && best_d > prev_best + 1e-12)
                    violate("prop3-min-distance-antitone-in-subsidy",
                            "d*(" + fmt(s) + ")=" + fmt(best_d) + " exceeds d*(" +
                                fmt(prev_s) + ")=" + fmt(prev_best));
                prev_best = best_d;
                prev_s = s;
                have_prev = true;
            }
        }
    }

    return rep;
}

std::vector<oracle::Alternative> random_nondominated_set(int n_alts, Rng& rng) {
    if (n_alts < 1) throw InvalidInstanceError("need at least one alternative");
    std::vector<oracle::Alternative> alts(static_cast<std::size_t>(n_alts));
    alts[0].distance = rng.next_real(5.0, 15.0);
    for (int i = 1; i < n_alts; ++i)
        alts[static_cast<std::size_t>(i)].distance =
            alts[static_cast<std::size_t>(i - 1)].distance + rng.next_real(0.5, 5.0);
    alts[static_cast<std::size_t>(n_alts - 1)].flow_cost = rng.next_real(0.5, 3.0);
    for (int i = n_alts - 1; i-- > 0;)
        alts[static_cast<std::size_t>(i)].flow_cost =
            alts[static_cast<std::size_t>(i + 1)].flow_cost + rng.next_real(0.5, 4.0);
    return alts;
}

} // namespace mshift::policy
