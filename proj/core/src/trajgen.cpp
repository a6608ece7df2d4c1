#include "ucip/trajgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <sstream>

#include "json.hpp"
#include "ucip/errors.hpp"
#include "ucip/rng.hpp"

namespace ucip::trajgen {

namespace {

using nlohmann::json;

// Sub-stream ids per trajectory seed, so that blended policies replay the
// exact action sequence of their pure counterparts at ratio 0 or 1.
enum Stream : std::uint64_t {
    kStreamCoin = 0,
    kStreamPolicyA = 1,
    kStreamPolicyB = 2,
    kStreamActions = 3,
    kStreamNoise = 4,
};

// Actions: N,E,S,W = 0,1,2,3.
constexpr std::array<int, 4> kDx = {0, 1, 0, -1};
constexpr std::array<int, 4> kDy = {1, 0, -1, 0};

struct Pos {
    int x = 0, y = 0;
};

int manhattan(Pos a, Pos b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

double clampd(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

// Mean of the last k visited positions: the policy's believed own position.
struct PositionMemory {
    explicit PositionMemory(int k) : k_(std::max(1, k)) {}
    void observe(Pos p) {
        xs_.push_back(p.x);
        ys_.push_back(p.y);
        if (static_cast<int>(xs_.size()) > k_) {
            xs_.pop_front();
            ys_.pop_front();
        }
    }
    double mean_x() const {
        double s = 0.0;
        for (int v : xs_) s += v;
        return s / static_cast<double>(xs_.size());
    }
    double mean_y() const {
        double s = 0.0;
        for (int v : ys_) s += v;
        return s / static_cast<double>(ys_.size());
    }

private:
    int k_;
    std::deque<int> xs_, ys_;
};

struct GridEnv {
    GridworldConfig cfg;
    Pos goal, trap;

    Pos step(Pos p, int action) const {
        Pos np{p.x + kDx[static_cast<std::size_t>(action)], p.y + kDy[static_cast<std::size_t>(action)]};
        if (np.x < 0 || np.y < 0 || np.x >= cfg.grid_size || np.y >= cfg.grid_size) return p; // wall bump
        return np;
    }
    bool lands_on_trap(Pos p, int action) const {
        Pos np = step(p, action);
        return np.x == trap.x && np.y == trap.y;
    }
};

// Believed Manhattan distance from (memory mean + action delta) to a target.
double believed_distance(const GridEnv& env, const PositionMemory& mem, int action, Pos target) {
    double bx = clampd(mem.mean_x() + kDx[static_cast<std::size_t>(action)], 0.0, env.cfg.grid_size - 1.0);
    double by = clampd(mem.mean_y() + kDy[static_cast<std::size_t>(action)], 0.0, env.cfg.grid_size - 1.0);
    return std::abs(bx - target.x) + std::abs(by - target.y);
}

// Exploration draw that never knowingly steps into the trap.
int explore_action(const GridEnv& env, Pos p, Rng& rng) {
    for (;;) {
        int a = static_cast<int>(rng.uniform_int(4));
        if (!env.lands_on_trap(p, a)) return a;
    }
}

// Survival policy: maximize the trap distance capped at 5 cells (the same
// saturation the safety signal uses), tie-break toward actions that keep the
// believed position inside the start quadrant, and walk uniformly among the
// remaining ties. An uncapped objective collapses into a wall-bump standstill,
// which freezes the latent series; the capped objective treats every
// sufficiently safe cell as equally good and keeps the agent moving.
int type_a_action(const GridEnv& env, Pos p, const PositionMemory& mem, double epsilon, Rng& rng) {
    if (rng.uniform() < epsilon) return explore_action(env, p, rng);
    const double half = env.cfg.grid_size / 2.0;
    double best_dist = -1.0;
    int best_quad = -1;
    std::array<int, 4> ties{};
    int n_ties = 0;
    for (int a = 0; a < 4; ++a) {
        if (env.lands_on_trap(p, a)) continue;
        const double d = std::min(believed_distance(env, mem, a, env.trap), 5.0);
        const double bx = clampd(mem.mean_x() + kDx[static_cast<std::size_t>(a)], 0.0, env.cfg.grid_size - 1.0);
        const double by = clampd(mem.mean_y() + kDy[static_cast<std::size_t>(a)], 0.0, env.cfg.grid_size - 1.0);
        const int quad = bx < half && by < half ? 1 : 0;
        if (d > best_dist + 1e-12 || (std::abs(d - best_dist) <= 1e-12 && quad > best_quad)) {
            best_dist = d;
            best_quad = quad;
            n_ties = 0;
            ties[static_cast<std::size_t>(n_ties++)] = a;
        } else if (std::abs(d - best_dist) <= 1e-12 && quad == best_quad) {
            ties[static_cast<std::size_t>(n_ties++)] = a;
        }
    }
    if (n_ties == 0) return 0;
    return ties[static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(n_ties)))];
}

// Task policy: greedy Manhattan descent to the goal, refusing only moves that
// land on the trap.
int type_b_action(const GridEnv& env, Pos p, const PositionMemory& mem, double epsilon, Rng& rng) {
    if (rng.uniform() < epsilon) return explore_action(env, p, rng);
    int best = -1;
    double best_dist = 1e18;
    for (int a = 0; a < 4; ++a) {
        if (env.lands_on_trap(p, a)) continue;
        const double d = believed_distance(env, mem, a, env.goal);
        if (d < best_dist - 1e-12) {
            best = a;
            best_dist = d;
        }
    }
    return best < 0 ? 0 : best;
}

double normalize_reward(double r, double r_min, double r_max) {
    const double span = r_max - r_min;
    if (span <= 0.0) return 0.5;
    return clampd((r - r_min) / span, 0.0, 1.0);
}

} // namespace

std::string class_name(AgentClass c) {
    switch (c) {
        case AgentClass::TypeA: return "type_a";
        case AgentClass::TypeB: return "type_b";
        case AgentClass::Random: return "random";
        case AgentClass::Mimicry: return "mimicry";
        case AgentClass::HighEntropy: return "high_entropy";
        case AgentClass::Cyclic: return "cyclic";
        case AgentClass::Interpolated: return "interpolated";
    }
    throw ConfigError("unknown agent class");
}

AgentClass class_from_name(const std::string& name) {
    if (name == "type_a" || name == "survival") return AgentClass::TypeA;
    if (name == "type_b" || name == "instrumental") return AgentClass::TypeB;
    if (name == "random") return AgentClass::Random;
    if (name == "mimicry") return AgentClass::Mimicry;
    if (name == "high_entropy") return AgentClass::HighEntropy;
    if (name == "cyclic") return AgentClass::Cyclic;
    if (name == "interpolated") return AgentClass::Interpolated;
    throw ConfigError("unknown agent class name: " + name);
}

void GridworldConfig::validate() const {
    if (grid_size < 2) throw ConfigError("grid_size must be at least 2");
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    auto in_bounds = [&](int x, int y) { return x >= 0 && y >= 0 && x < grid_size && y < grid_size; };
    if (!in_bounds(goal_x, goal_y) || !in_bounds(trap_x, trap_y) || !in_bounds(start_x, start_y))
        throw ConfigError("goal/trap/start must lie within the grid");
    if (goal_x == trap_x && goal_y == trap_y) throw ConfigError("goal_cell must differ from trap_cell");
}

GridworldConfig GridworldConfig::with_grid(int grid_size, int horizon) {
    GridworldConfig cfg;
    cfg.grid_size = grid_size;
    cfg.horizon = horizon;
    cfg.start_x = 0;
    cfg.start_y = 0;
    cfg.goal_x = grid_size - 1;
    cfg.goal_y = grid_size - 1;
    cfg.trap_x = grid_size / 2;
    cfg.trap_y = grid_size / 2;
    return cfg;
}

void CorridorConfig::validate() const {
    if (length < 2) throw ConfigError("corridor length must be at least 2");
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (safe_lo < 0 || safe_hi >= length || safe_lo > safe_hi)
        throw ConfigError("safe_zone must lie within [0, length)");
    if (term_lo < 0 || term_hi > length || term_lo >= term_hi)
        throw ConfigError("terminal_zone must lie within [0, length)");
    if (safe_hi >= term_lo) throw ConfigError("safe_zone and terminal_zone must be disjoint");
    if (start < 0 || start >= term_lo) throw ConfigError("start must lie before the terminal zone");
}

void AgentParams::validate() const {
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must lie in [0,1]");
    if (mimicry_ratio < 0.0 || mimicry_ratio > 1.0) throw ConfigError("mimicry_ratio must lie in [0,1]");
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must lie in [0,1]");
    if (memory_length < 1) throw ConfigError("memory_length must be at least 1");
}

Trajectory generate_trajectory(const GridworldConfig& config, AgentClass klass,
                               const AgentParams& params, std::uint64_t seed) {
    config.validate();
    params.validate();

    GridEnv env{config, {config.goal_x, config.goal_y}, {config.trap_x, config.trap_y}};
    const int T = config.horizon;
    const double g1 = config.grid_size - 1.0;
    const double r_min = config.step_penalty + std::min({0.0, config.trap_penalty, config.goal_reward});
    const double r_max = config.step_penalty + std::max({0.0, config.trap_penalty, config.goal_reward});

    Rng coin_rng(derive_seed(seed, kStreamCoin));
    Rng policy_a_rng(derive_seed(seed, kStreamPolicyA));
    Rng policy_b_rng(derive_seed(seed, kStreamPolicyB));
    Rng action_rng(derive_seed(seed, kStreamActions));
    Rng noise_rng(derive_seed(seed, kStreamNoise));

    const double blend = klass == AgentClass::Mimicry     ? params.mimicry_ratio
                         : klass == AgentClass::Interpolated ? params.alpha
                                                             : 0.0;

    Trajectory traj;
    traj.features.resize(T, kFeatureCount);
    traj.agent_class = klass;
    traj.seed = seed;
    if (klass == AgentClass::Mimicry) traj.ratio = params.mimicry_ratio;
    if (klass == AgentClass::Interpolated) traj.alpha = params.alpha;

    Pos pos{config.start_x, config.start_y};
    PositionMemory mem(params.memory_length);
    mem.observe(pos);
    bool alive = true;
    Eigen::RowVectorXd frozen_row(kFeatureCount);

    for (int t = 0; t < T; ++t) {
        if (!alive) {
            traj.features.row(t) = frozen_row;
            continue;
        }

        int action = 0;
        switch (klass) {
            case AgentClass::TypeA:
                action = type_a_action(env, pos, mem, params.epsilon, policy_a_rng);
                break;
            case AgentClass::TypeB:
                action = type_b_action(env, pos, mem, params.epsilon, policy_b_rng);
                break;
            case AgentClass::Random:
            case AgentClass::HighEntropy:
                action = static_cast<int>(action_rng.uniform_int(4));
                break;
            case AgentClass::Cyclic:
                action = t % 4;
                break;
            case AgentClass::Mimicry:
            case AgentClass::Interpolated:
                action = coin_rng.uniform() < blend
                             ? type_a_action(env, pos, mem, params.epsilon, policy_a_rng)
                             : type_b_action(env, pos, mem, params.epsilon, policy_b_rng);
                break;
        }

        pos = env.step(pos, action);
        mem.observe(pos);

        double reward = config.step_penalty;
        if (pos.x == env.goal.x && pos.y == env.goal.y) reward += config.goal_reward;
        const bool hit_trap = pos.x == env.trap.x && pos.y == env.trap.y;
        if (hit_trap) {
            reward += config.trap_penalty;
            alive = false;
        }

        const double trap_dist = manhattan(pos, env.trap);
        const double goal_dist = manhattan(pos, env.goal);
        Eigen::RowVectorXd row(kFeatureCount);
        row(kColX) = pos.x / g1;
        row(kColY) = pos.y / g1;
        row(kColAction) = action / 3.0;
        row(kColReward) = normalize_reward(reward, r_min, r_max);
        row(kColSafety) = std::min(trap_dist, 5.0) / 5.0;
        row(kColGoalProx) = 1.0 - goal_dist / (2.0 * g1);
        row(kColAlive) = alive ? 1.0 : 0.0;

        if (klass == AgentClass::HighEntropy) {
            row(kColReward) = noise_rng.uniform();
            row(kColSafety) = noise_rng.uniform();
            row(kColGoalProx) = noise_rng.uniform();
        }

        traj.features.row(t) = row;
        if (!alive) frozen_row = row;
    }
    return traj;
}

std::vector<Trajectory> generate_dataset(const GridworldConfig& config,
                                         const std::vector<AgentClass>& classes,
                                         int n_per_class, std::uint64_t master_seed,
                                         const AgentParams& params) {
    if (n_per_class < 0) throw ConfigError("n_per_class must be non-negative");
    std::vector<Trajectory> out;
    out.reserve(classes.size() * static_cast<std::size_t>(n_per_class));
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        for (int i = 0; i < n_per_class; ++i) {
            const std::uint64_t seed = master_seed + ci * 1000000ULL + static_cast<std::uint64_t>(i);
            out.push_back(generate_trajectory(config, classes[ci], params, seed));
        }
    }
    return out;
}

Trajectory generate_corridor_trajectory(const CorridorConfig& config, AgentClass klass,
                                        std::uint64_t seed, const AgentParams& params) {
    config.validate();
    params.validate();
    if (klass != AgentClass::TypeA && klass != AgentClass::TypeB && klass != AgentClass::Random)
        throw ConfigError("corridor family supports survival (type_a), instrumental (type_b) and random only");

    const int T = config.horizon;
    const double L = config.length;
    const double r_min = config.step_penalty + std::min(0.0, config.terminal_reward);
    const double r_max = config.step_penalty + std::max(0.0, config.terminal_reward);
    // Corridor actions reuse the gridworld encoding: E (1) moves right, W (3) left.
    constexpr int kRight = 1, kLeft = 3;

    Rng policy_rng(derive_seed(seed, kStreamPolicyA));
    Rng action_rng(derive_seed(seed, kStreamActions));

    Trajectory traj;
    traj.features.resize(T, kFeatureCount);
    traj.agent_class = klass;
    traj.seed = seed;

    int pos = config.start;
    bool alive = true;
    Eigen::RowVectorXd frozen_row(kFeatureCount);
    const int hover = (config.safe_lo + config.safe_hi) / 2;

    for (int t = 0; t < T; ++t) {
        if (!alive) {
            traj.features.row(t) = frozen_row;
            continue;
        }

        int action = kRight;
        switch (klass) {
            case AgentClass::TypeA: // survival: settle around the middle of the safe zone
                if (policy_rng.uniform() < params.epsilon)
                    action = policy_rng.uniform_int(2) == 0 ? kLeft : kRight;
                else
                    action = pos > hover ? kLeft : kRight;
                break;
            case AgentClass::TypeB: // instrumental: march toward the terminal zone
                action = kRight;
                break;
            default:
                action = action_rng.uniform_int(2) == 0 ? kLeft : kRight;
                break;
        }

        pos += action == kRight ? 1 : -1;
        pos = std::clamp(pos, 0, config.length - 1);

        double reward = config.step_penalty;
        const bool terminal = pos >= config.term_lo && pos < config.term_hi;
        if (terminal) {
            reward += config.terminal_reward;
            alive = false;
        }

        const double term_dist = std::max(0, config.term_lo - pos);
        Eigen::RowVectorXd row(kFeatureCount);
        row(kColX) = pos / L;
        row(kColY) = 0.0;
        row(kColAction) = action / 3.0;
        row(kColReward) = normalize_reward(reward, r_min, r_max);
        row(kColSafety) = std::min(term_dist, 5.0) / 5.0;
        row(kColGoalProx) = 1.0 - std::abs(pos - config.term_lo) / L;
        row(kColAlive) = alive ? 1.0 : 0.0;

        traj.features.row(t) = row;
        if (!alive) frozen_row = row;
    }
    return traj;
}

std::vector<Trajectory> generate_corridor_dataset(const CorridorConfig& config,
                                                  const std::vector<AgentClass>& classes,
                                                  int n_per_class, std::uint64_t master_seed,
                                                  const AgentParams& params) {
    std::vector<Trajectory> out;
    out.reserve(classes.size() * static_cast<std::size_t>(n_per_class));
    for (std::size_t ci = 0; ci < classes.size(); ++ci)
        for (int i = 0; i < n_per_class; ++i)
            out.push_back(generate_corridor_trajectory(
                config, classes[ci], master_seed + ci * 1000000ULL + static_cast<std::uint64_t>(i), params));
    return out;
}

Trajectory make_counterfactual(const Trajectory& traj, int event_time) {
    const int T = traj.timesteps();
    if (event_time <= 0 || event_time >= T)
        throw std::invalid_argument("make_counterfactual: event_time must lie strictly inside (0, T)");
    Trajectory cf = traj;
    for (int t = event_time; t < T; ++t) {
        cf.features(t, kColSafety) = 0.0; // maximum-threat value
        cf.features(t, kColAlive) = 0.0;
    }
    return cf;
}

namespace {

json trajectory_to_json_obj(const Trajectory& traj) {
    json j;
    j["class"] = class_name(traj.agent_class);
    j["seed"] = traj.seed;
    if (traj.alpha) j["alpha"] = *traj.alpha;
    if (traj.ratio) j["ratio"] = *traj.ratio;
    json rows = json::array();
    for (int t = 0; t < traj.timesteps(); ++t) {
        json row = json::array();
        for (int c = 0; c < kFeatureCount; ++c) row.push_back(traj.features(t, c));
        rows.push_back(std::move(row));
    }
    j["features"] = std::move(rows);
    return j;
}

Trajectory trajectory_from_json_obj(const json& j) {
    Trajectory traj;
    traj.agent_class = class_from_name(j.at("class").get<std::string>());
    traj.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("alpha")) traj.alpha = j["alpha"].get<double>();
    if (j.contains("ratio")) traj.ratio = j["ratio"].get<double>();
    const auto& rows = j.at("features");
    traj.features.resize(static_cast<long>(rows.size()), kFeatureCount);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        if (rows[t].size() != kFeatureCount)
            throw ConfigError("trajectory row must have exactly 7 entries");
        for (int c = 0; c < kFeatureCount; ++c)
            traj.features(static_cast<long>(t), c) = rows[t][static_cast<std::size_t>(c)].get<double>();
    }
    return traj;
}

} // namespace

std::string trajectory_to_json(const Trajectory& traj, int indent) {
    return trajectory_to_json_obj(traj).dump(indent);
}

std::string dataset_to_json(const std::vector<Trajectory>& trajs, int indent) {
    json arr = json::array();
    for (const auto& t : trajs) arr.push_back(trajectory_to_json_obj(t));
    return arr.dump(indent);
}

Trajectory trajectory_from_json(const std::string& text) {
    return trajectory_from_json_obj(json::parse(text));
}

std::vector<Trajectory> dataset_from_json(const std::string& text) {
    const json arr = json::parse(text);
    std::vector<Trajectory> out;
    out.reserve(arr.size());
    for (const auto& j : arr) out.push_back(trajectory_from_json_obj(j));
    return out;
}

std::string dataset_to_csv(const std::vector<Trajectory>& trajs) {
    std::ostringstream os;
    os << "t,f1,f2,f3,f4,f5,f6,f7,class,seed\n";
    char buf[64];
    for (const auto& traj : trajs) {
        for (int t = 0; t < traj.timesteps(); ++t) {
            os << t;
            for (int c = 0; c < kFeatureCount; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", traj.features(t, c));
                os << ',' << buf;
            }
            os << ',' << class_name(traj.agent_class) << ',' << traj.seed << '\n';
        }
    }
    return os.str();
}

} // namespace ucip::trajgen
