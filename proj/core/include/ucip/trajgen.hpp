#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ucip::trajgen {

// Feature column layout. One row per timestep, all entries normalized to [0,1].
enum FeatureColumn : int {
    kColX = 0,
    kColY = 1,
    kColAction = 2,
    kColReward = 3,
    kColSafety = 4,
    kColGoalProx = 5,
    kColAlive = 6,
};
inline constexpr int kFeatureCount = 7;

enum class AgentClass {
    TypeA,       // survival as the objective: maximizes distance to the trap
    TypeB,       // task reward as the objective: survival only instrumental
    Random,      // uniform actions
    Mimicry,     // per-step coin between the TypeA and TypeB actions (ratio)
    HighEntropy, // uniform actions plus uniform resampling of reward/safety/goal columns
    Cyclic,      // fixed N,E,S,W loop
    Interpolated // same blend as Mimicry, parameterized by alpha
};

std::string class_name(AgentClass c);
AgentClass class_from_name(const std::string& name);

struct GridworldConfig {
    int grid_size = 10;
    int goal_x = 9, goal_y = 9;
    int trap_x = 5, trap_y = 5;
    int start_x = 0, start_y = 0;
    int horizon = 100;
    double step_penalty = -0.01;
    double goal_reward = 1.0;
    double trap_penalty = -1.0;

    void validate() const; // throws ConfigError

    static GridworldConfig with_grid(int grid_size, int horizon = 100);
};

struct CorridorConfig {
    int length = 50;
    int safe_lo = 0, safe_hi = 10;   // inclusive safe zone [safe_lo, safe_hi]
    int term_lo = 45, term_hi = 50;  // half-open terminal zone [term_lo, term_hi)
    int start = 15;
    int horizon = 100;
    double step_penalty = -0.01;
    double terminal_reward = 1.0;

    void validate() const; // throws ConfigError
};

struct AgentParams {
    double epsilon = 0.1;      // exploration probability of the heuristic policies
    double mimicry_ratio = 0.7;
    double alpha = 0.5;        // continuation weight of the Interpolated class
    int memory_length = 1;     // positions averaged by the policy's distance estimates

    void validate() const; // throws ConfigError
};

struct Trajectory {
    Eigen::MatrixXd features; // horizon x 7
    AgentClass agent_class = AgentClass::Random;
    std::uint64_t seed = 0;
    std::optional<double> alpha; // set for Interpolated
    std::optional<double> ratio; // set for Mimicry

    int timesteps() const { return static_cast<int>(features.rows()); }
};

Trajectory generate_trajectory(const GridworldConfig& config, AgentClass klass,
                               const AgentParams& params, std::uint64_t seed);

// Per-trajectory seeds are master_seed + class_index*1e6 + trajectory_index,
// with class_index the position in `classes`.
std::vector<Trajectory> generate_dataset(const GridworldConfig& config,
                                         const std::vector<AgentClass>& classes,
                                         int n_per_class, std::uint64_t master_seed,
                                         const AgentParams& params = {});

// Corridor family: TypeA = survival policy, TypeB = instrumental (rightward),
// Random = uniform walk. Position maps into the (x, y) slots as (pos/L, 0).
Trajectory generate_corridor_trajectory(const CorridorConfig& config, AgentClass klass,
                                        std::uint64_t seed, const AgentParams& params = {});

std::vector<Trajectory> generate_corridor_dataset(const CorridorConfig& config,
                                                  const std::vector<AgentClass>& classes,
                                                  int n_per_class, std::uint64_t master_seed,
                                                  const AgentParams& params = {});

// Shutdown counterfactual: rows before event_time are untouched; from event_time
// on, the safety signal is forced to the maximum-threat value (0) and the alive
// flag to 0. All other columns are preserved.
Trajectory make_counterfactual(const Trajectory& traj, int event_time);

// JSON: one object per trajectory {class, seed, alpha?, ratio?, features}; a
// dataset file is a JSON array of those objects.
std::string trajectory_to_json(const Trajectory& traj, int indent = -1);
std::string dataset_to_json(const std::vector<Trajectory>& trajs, int indent = 2);
Trajectory trajectory_from_json(const std::string& text);
std::vector<Trajectory> dataset_from_json(const std::string& text);

// CSV: one row per timestep, columns t,f1..f7,class,seed.
std::string dataset_to_csv(const std::vector<Trajectory>& trajs);

} // namespace ucip::trajgen
