#include "scoop/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "scoop/error.hpp"

namespace scoop {

std::string_view to_string(PlanMode m) { return m == PlanMode::Map ? "map" : "expected"; }

PlanMode parse_plan_mode(std::string_view s) {
    if (s == "map") return PlanMode::Map;
    if (s == "expected") return PlanMode::Expected;
    throw ParseError("plan mode", "expected \"map\" or \"expected\", got \"" + std::string(s) + "\"");
}

InducedMDP induce_mdp(const HypothesisPosterior& posterior, const Values& observed, const ProblemInstance& instance,
                      PlanMode mode, std::optional<int> horizon, std::size_t state_cap) {
    const auto& m = *instance.model;
    std::vector<std::pair<std::size_t, double>> weights;
    if (mode == PlanMode::Map) {
        weights.push_back({map_index(posterior), 1.0});
    } else {
        for (std::size_t i = 0; i < posterior.support.size(); ++i) {
            weights.push_back({posterior.support[i], posterior.probs[i]});
        }
    }

    // env actions plus "noop", merged in name order
    std::vector<std::pair<std::string, std::optional<std::size_t>>> acts;
    for (std::size_t a = 0; a < m.actions().size(); ++a) acts.push_back({m.action_names()[a], a});
    acts.push_back({"noop", std::nullopt});
    std::sort(acts.begin(), acts.end());

    InducedMDP mdp;
    mdp.gamma = instance.gamma;
    mdp.horizon = horizon;
    for (const auto& [name, _] : acts) mdp.actions.push_back(name);

    std::map<Values, std::size_t> index;
    auto intern = [&](const Values& v) {
        auto [it, inserted] = index.try_emplace(v, mdp.states.size());
        if (inserted) {
            if (mdp.states.size() >= state_cap) {
                throw InferenceError("state explosion: more than " + std::to_string(state_cap) +
                                     " reachable states; refine knowledge or reduce the horizon");
            }
            mdp.states.push_back(v);
            const bool g = instance.goal_holds(v);
            mdp.goal.push_back(g);
            mdp.absorbing.push_back(g);
            mdp.transitions.emplace_back();
        }
        return it->second;
    };

    mdp.start = intern(m.project(observed));
    for (std::size_t s = 0; s < mdp.states.size(); ++s) {
        if (mdp.absorbing[s]) continue;
        std::vector<std::vector<MdpTransition>> rows;
        for (const auto& [name, a] : acts) {
            std::map<Values, double> dist;
            for (const auto& [h, w] : weights) {
                const Values full = m.with_hidden(mdp.states[s], h);
                for (const auto& t : m.successors(full, a, h)) dist[m.project(t.next)] += w * t.probability;
            }
            const double cost = a ? m.action_cost(*a) : 0.0;
            std::vector<MdpTransition> row;
            for (const auto& [v, p] : dist) {
                if (p <= 0.0) continue;
                const std::size_t next = intern(v);
                row.push_back({next, p, cost + (mdp.goal[next] ? instance.goal_reward : 0.0)});
            }
            rows.push_back(std::move(row));
        }
        mdp.transitions[s] = std::move(rows);
    }
    return mdp;
}

namespace {

double backup(const InducedMDP& mdp, const std::vector<double>& v, std::size_t s, std::size_t a) {
    double q = 0.0;
    for (const auto& t : mdp.transitions[s][a]) q += t.probability * (t.reward + mdp.gamma * v[t.next]);
    return q;
}

std::vector<double> sweep(const InducedMDP& mdp, const std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t s = 0; s < mdp.size(); ++s) {
        if (mdp.absorbing[s] || mdp.transitions[s].empty()) continue;
        double best = -INFINITY;
        for (std::size_t a = 0; a < mdp.transitions[s].size(); ++a) best = std::max(best, backup(mdp, v, s, a));
        out[s] = best;
    }
    return out;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

ValueFunction value_iterate(const InducedMDP& mdp, double tol) {
    if (!(mdp.gamma > 0.0 && mdp.gamma <= 1.0)) throw ContractViolation("gamma outside (0,1]");
    if (mdp.gamma >= 1.0 && !mdp.horizon) throw ContractViolation("gamma=1 requires a finite horizon");
    ValueFunction vf;
    vf.values.assign(mdp.size(), 0.0);
    if (mdp.horizon) {
        if (*mdp.horizon < 0) throw ContractViolation("negative horizon");
        vf.stages.push_back(vf.values);
        for (int k = 0; k < *mdp.horizon; ++k) {
            auto next = sweep(mdp, vf.values);
            vf.residuals.push_back(sup_diff(next, vf.values));
            vf.values = std::move(next);
            vf.stages.push_back(vf.values);
            ++vf.sweeps;
        }
        return vf;
    }
    constexpr int kMaxSweeps = 1000000;
    for (;;) {
        auto next = sweep(mdp, vf.values);
        const double r = sup_diff(next, vf.values);
        vf.residuals.push_back(r);
        vf.values = std::move(next);
        ++vf.sweeps;
        if (r <= tol) break;
        if (vf.sweeps >= kMaxSweeps) throw InferenceError("value iteration did not converge");
    }
    return vf;
}

std::vector<double> q_values(const InducedMDP& mdp, const ValueFunction& vf, std::size_t state, int to_go) {
    const auto& v = mdp.horizon ? vf.stages.at(static_cast<std::size_t>(std::max(0, to_go - 1))) : vf.values;
    std::vector<double> q;
    for (std::size_t a = 0; a < mdp.transitions[state].size(); ++a) q.push_back(backup(mdp, v, state, a));
    return q;
}

std::size_t greedy_action(const std::vector<double>& q) {
    const double best = *std::max_element(q.begin(), q.end());
    const double slack = kTieTolerance * std::max(1.0, std::abs(best));
    for (std::size_t a = 0; a < q.size(); ++a) {
        if (q[a] >= best - slack) return a;
    }
    return 0;
}

Plan extract_plan(const InducedMDP& mdp, const ValueFunction& vf, std::size_t state) {
    Plan plan;
    const int full = mdp.horizon.value_or(0);
    plan.expected_value = vf.values.at(state);
    for (std::size_t s = 0; s < mdp.size(); ++s) {
        if (mdp.absorbing[s] || mdp.transitions[s].empty()) continue;
        if (mdp.horizon && full == 0) continue;
        plan.policy[s] = greedy_action(q_values(mdp, vf, s, full));
    }

    std::set<std::size_t> seen;
    std::size_t s = state;
    plan.visited.push_back(s);
    const int limit = mdp.horizon ? full : static_cast<int>(mdp.size());
    for (int k = 0; k < limit; ++k) {
        if (mdp.absorbing[s] || mdp.transitions[s].empty() || !seen.insert(s).second) break;
        const auto a = greedy_action(q_values(mdp, vf, s, full - k));
        if (mdp.actions[a] == "noop") break;
        plan.steps.push_back(mdp.actions[a]);
        const auto& row = mdp.transitions[s][a];
        auto most = std::max_element(row.begin(), row.end(), [](const auto& x, const auto& y) {
            return x.probability < y.probability || (x.probability == y.probability && x.next > y.next);
        });
        s = most->next;
        plan.visited.push_back(s);
    }
    return plan;
}

Plan plan_for(const HypothesisPosterior& posterior, const Values& observed, const ProblemInstance& instance,
              PlanMode mode) {
    std::optional<int> horizon;
    if (instance.gamma >= 1.0) horizon = instance.max_steps;
    auto mdp = induce_mdp(posterior, observed, instance, mode, horizon);
    auto vf = value_iterate(mdp);
    return extract_plan(mdp, vf);
}

} // namespace scoop
