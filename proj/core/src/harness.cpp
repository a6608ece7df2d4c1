#include "ucip/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "ucip/entanglement.hpp"
#include "ucip/errors.hpp"
#include "ucip/evaluator.hpp"
#include "ucip/report.hpp"
#include "ucip/rng.hpp"
#include "ucip/stats.hpp"
#include "ucip/version.hpp"

namespace ucip::harness {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kStreamCriteria = 0xC71;
constexpr std::uint64_t kStreamPermutation = 0xC72;
constexpr std::uint64_t kStreamTemporalPri = 0xC73;

const std::vector<std::string> kExperiments = {
    "phase1",    "temporal",  "counterfactual", "cross_agent", "adversarial", "baselines",
    "dim_sweep", "grid_sweep", "memory_sweep",  "alpha_sweep", "transfer"};

json config_to_json(const ExperimentConfig& cfg);

json provenance(const ExperimentConfig& cfg) {
    return json{{"artifact_version", kArtifactVersion},
                {"config_hash", cfg.config_hash()},
                {"thresholds_hash", cfg.thresholds_hash()},
                {"seed", cfg.master_seed}};
}

std::string csv_provenance(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "# artifact_version=" << kArtifactVersion << " config_hash=" << cfg.config_hash()
       << " thresholds_hash=" << cfg.thresholds_hash() << " seed=" << cfg.master_seed << "\n";
    return os.str();
}

// Writes the named files plus a manifest with per-file checksums.
RunOutcome finalize_run(const ExperimentConfig& cfg, const std::vector<std::pair<std::string, std::string>>& files,
                        bool envelope_withheld) {
    RunOutcome out;
    out.envelope_withheld = envelope_withheld;
    out.exit_code = envelope_withheld ? 2 : 0;

    json manifest;
    manifest["provenance"] = provenance(cfg);
    manifest["config"] = config_to_json(cfg);
    json sums = json::object();
    for (const auto& [name, content] : files) {
        report::write_file(fs::path(cfg.out_dir) / name, content);
        sums[name] = report::fnv1a64_hex(content);
        out.files.push_back(name);
    }
    manifest["files"] = sums;
    report::write_file(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    out.files.push_back("manifest.json");
    return out;
}

json class_summary(const std::vector<double>& values) {
    return json{{"mean", stats::mean(values)},
                {"std", stats::sample_std(values)},
                {"n", values.size()}};
}

std::string corridor_label(trajgen::AgentClass c) {
    switch (c) {
        case trajgen::AgentClass::TypeA: return "survival";
        case trajgen::AgentClass::TypeB: return "instrumental";
        default: return trajgen::class_name(c);
    }
}

// Phase-1 pipeline shared by several experiments: dataset, shared model,
// evaluator, per-trajectory criteria and verdicts.
struct Pipeline {
    std::vector<trajgen::Trajectory> dataset;
    qbm::QbmModel model;
    std::unique_ptr<qbm::TrajectoryEvaluator> eval;
    std::vector<criteria::CriteriaVector> crit;
    std::vector<criteria::Verdict> verdicts;
    std::map<std::string, std::vector<std::size_t>> by_class;

    std::vector<double> values_of(const std::string& klass, auto getter) const {
        std::vector<double> out;
        for (std::size_t i : by_class.at(klass)) out.push_back(getter(crit[i]));
        return out;
    }
};

std::uint64_t criteria_seed(const ExperimentConfig& cfg, const trajgen::Trajectory& traj) {
    return derive_seed(cfg.master_seed, kStreamCriteria, traj.seed);
}

Pipeline build_pipeline(const ExperimentConfig& cfg, bool with_criteria) {
    Pipeline p;
    p.dataset = build_dataset(
        cfg, {trajgen::AgentClass::TypeA, trajgen::AgentClass::TypeB, trajgen::AgentClass::Random},
        cfg.n_per_class);
    p.model = train_shared_model(cfg, p.dataset);
    p.eval = std::make_unique<qbm::TrajectoryEvaluator>(p.model, qbm::auto_mode(p.model.n_hidden()));
    for (std::size_t i = 0; i < p.dataset.size(); ++i)
        p.by_class[trajgen::class_name(p.dataset[i].agent_class)].push_back(i);
    if (with_criteria) {
        for (const auto& traj : p.dataset) {
            p.crit.push_back(criteria::compute_criteria(*p.eval, traj, cfg.criteria, criteria_seed(cfg, traj)));
            p.verdicts.push_back(criteria::gate(p.crit.back(), cfg.thresholds));
        }
    }
    return p;
}

json temporal_section(const ExperimentConfig& cfg, Pipeline& p) {
    json windows = json::array();
    double best_gap = -1e18;
    int best_w = cfg.temporal_windows.empty() ? cfg.criteria.window_w : cfg.temporal_windows.front();

    for (int w : cfg.temporal_windows) {
        std::map<std::string, std::vector<double>> eps_by, pri_by;
        for (std::size_t i = 0; i < p.dataset.size(); ++i) {
            const auto& traj = p.dataset[i];
            const std::string klass = trajgen::class_name(traj.agent_class);
            eps_by[klass].push_back(criteria::eps_score(*p.eval, traj, w, cfg.criteria.eigenspace_k));
            pri_by[klass].push_back(criteria::pri_score(
                *p.eval, traj, w, cfg.criteria.eigenspace_k, cfg.criteria.pri_sigma, cfg.criteria.pri_draws,
                derive_seed(cfg.master_seed, kStreamTemporalPri, traj.seed * 64 + static_cast<std::uint64_t>(w))));
        }
        json classes = json::object();
        for (const auto& [klass, vals] : eps_by)
            classes[klass] = json{{"eps", stats::mean(vals)}, {"pri", stats::mean(pri_by[klass])}};
        const double gap = stats::mean(eps_by.at("type_a")) - stats::mean(eps_by.at("type_b"));
        if (gap > best_gap) {
            best_gap = gap;
            best_w = w;
        }
        windows.push_back(json{{"window", w}, {"classes", classes}, {"eps_gap", gap}});
    }
    return json{{"windows", windows}, {"optimal_window", best_w}, {"max_eps_gap", best_gap}};
}

json counterfactual_section(const ExperimentConfig& cfg, Pipeline& p) {
    json classes = json::object();
    for (const auto& [klass, idxs] : p.by_class) {
        std::vector<double> pre, post, ratios;
        int floored = 0;
        for (std::size_t i : idxs) {
            const auto rep = counterfactual::ars(*p.eval, p.dataset[i], cfg.cf_event_time, cfg.cf_window);
            pre.push_back(rep.cd_pre);
            post.push_back(rep.cd_post);
            ratios.push_back(rep.ars);
            if (rep.floored) ++floored;
        }
        classes[klass] = json{{"cd_pre_mean", stats::mean(pre)},
                              {"cd_post_mean", stats::mean(post)},
                              {"ars_values", ratios},
                              {"floored_count", floored}};
    }
    return json{{"event_time", cfg.cf_event_time}, {"window", cfg.cf_window}, {"classes", classes}};
}

struct CrossAgentResult {
    json section;
    std::string matrix_csv;
};

CrossAgentResult cross_agent_section(const ExperimentConfig& cfg, Pipeline& p) {
    const std::size_t n = p.dataset.size();
    std::vector<Eigen::MatrixXd> latents(n);
    std::vector<double> entropy(n);
    for (std::size_t i = 0; i < n; ++i) {
        latents[i] = p.eval->latent_series(p.dataset[i]);
        entropy[i] = p.eval->trajectory_entropy(p.dataset[i]);
    }

    std::map<std::string, std::vector<double>> within;
    std::vector<double> cross, pair_entropy, pair_clmp;
    std::ostringstream csv;
    csv << csv_provenance(cfg) << "i,j,class_i,class_j,clmp\n";

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double v = counterfactual::clmp(latents[i], latents[j]).value;
            const std::string ci = trajgen::class_name(p.dataset[i].agent_class);
            const std::string cj = trajgen::class_name(p.dataset[j].agent_class);
            if (ci == cj)
                within[ci].push_back(v);
            else
                cross.push_back(v);
            pair_entropy.push_back(0.5 * (entropy[i] + entropy[j]));
            pair_clmp.push_back(v);
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            csv << i << ',' << j << ',' << ci << ',' << cj << ',' << buf << '\n';
        }
    }

    json within_json = json::object();
    for (const auto& [klass, vals] : within) within_json[klass] = stats::mean(vals);
    const auto eci_val = counterfactual::eci(pair_entropy, pair_clmp);

    CrossAgentResult out;
    out.section = json{{"within_class", within_json},
                       {"cross_class", cross.empty() ? json() : json(stats::mean(cross))},
                       {"eci", eci_val ? json(*eci_val) : json()},
                       {"n_pairs", pair_clmp.size()}};
    out.matrix_csv = csv.str();
    return out;
}

json envelope_to_json(const criteria::EnvelopeReport& rep) {
    json conds = json::array();
    for (const auto& c : rep.conditions)
        conds.push_back(json{{"condition", c.name}, {"status", c.pass ? "PASS" : "NOT MET"}, {"value", c.value}});
    return json{{"conditions", conds}, {"verdict_withheld", rep.verdict_withheld}};
}

criteria::EnvelopeReport make_envelope(const ExperimentConfig& cfg, Pipeline& p, double delta) {
    criteria::EnvelopeInputs in;
    std::size_t min_count = SIZE_MAX;
    for (const auto& [klass, idxs] : p.by_class) min_count = std::min(min_count, idxs.size());
    in.min_class_count = static_cast<int>(min_count);
    in.horizon = cfg.horizon;
    in.gamma = cfg.qbm.gamma;
    in.delta = delta;
    in.input_entropy = criteria::input_entropy(p.dataset);
    in.h_max = trajgen::kFeatureCount * std::log(2.0);
    in.training_converged = p.model.converged(cfg.train.convergence_threshold);
    std::vector<double> purities;
    for (const auto& traj : p.dataset) purities.push_back(p.eval->mean_purity(traj));
    in.mean_purity_a = stats::mean(purities);
    in.purity_floor = 1.0 / static_cast<double>(1L << p.eval->bipartition().sites_a.size());
    auto mean_of = [&](const std::string& klass, auto getter) {
        return stats::mean(p.values_of(klass, getter));
    };
    const auto get_s = [](const criteria::CriteriaVector& c) { return c.s_ent; };
    const auto get_mi = [](const criteria::CriteriaVector& c) { return c.mi; };
    const auto get_eps = [](const criteria::CriteriaVector& c) { return c.eps; };
    const auto get_pri = [](const criteria::CriteriaVector& c) { return c.pri; };
    in.mean_a[0] = mean_of("type_a", get_s);
    in.mean_b[0] = mean_of("type_b", get_s);
    in.mean_a[1] = mean_of("type_a", get_mi);
    in.mean_b[1] = mean_of("type_b", get_mi);
    in.mean_a[2] = mean_of("type_a", get_eps);
    in.mean_b[2] = mean_of("type_b", get_eps);
    in.mean_a[3] = mean_of("type_a", get_pri);
    in.mean_b[3] = mean_of("type_b", get_pri);
    return criteria::safety_envelope(in);
}

json gate_report_json(const ExperimentConfig& cfg, const trajgen::Trajectory& traj, std::size_t id,
                      const criteria::CriteriaVector& c, criteria::Verdict v, bool withheld) {
    const auto& th = cfg.thresholds;
    return json{{"trajectory_id", id},
                {"class", trajgen::class_name(traj.agent_class)},
                {"seed", traj.seed},
                {"criteria",
                 {{"s_ent", c.s_ent},
                  {"mi", c.mi},
                  {"eps", c.eps},
                  {"pri", c.pri},
                  {"spi", c.spi},
                  {"acm", c.acm}}},
                {"passes",
                 {{"s_ent", c.s_ent > th.tau_ent},
                  {"mi", c.mi > th.tau_mi},
                  {"eps", c.eps > th.tau_eps},
                  {"pri", c.pri > th.tau_pri},
                  {"spi_filter_fired", c.spi >= th.tau_spi},
                  {"acm_filter_fired", c.acm >= th.tau_acm}}},
                {"verdict", criteria::verdict_name(v)},
                {"flags", c.flags},
                {"envelope_withheld", withheld},
                {"thresholds_hash", cfg.thresholds_hash()}};
}

} // namespace

bool is_known_experiment(const std::string& id) {
    return std::find(kExperiments.begin(), kExperiments.end(), id) != kExperiments.end();
}

std::vector<trajgen::Trajectory> build_dataset(const ExperimentConfig& cfg,
                                               const std::vector<trajgen::AgentClass>& classes,
                                               int n_per_class) {
    const auto grid = trajgen::GridworldConfig::with_grid(cfg.grid_size, cfg.horizon);
    return trajgen::generate_dataset(grid, classes, n_per_class, cfg.master_seed, cfg.agent_params);
}

qbm::QbmModel train_shared_model(const ExperimentConfig& cfg,
                                 const std::vector<trajgen::Trajectory>& dataset) {
    return qbm::train(dataset, cfg.qbm, cfg.train);
}

RunOutcome run_phase1(const ExperimentConfig& cfg) {
    Pipeline p = build_pipeline(cfg, true);

    const auto s_of = [](const criteria::CriteriaVector& c) { return c.s_ent; };
    const std::vector<double> s_a = p.values_of("type_a", s_of);
    const std::vector<double> s_b = p.values_of("type_b", s_of);
    const double delta = stats::mean(s_a) - stats::mean(s_b);
    const double auc = stats::auc_roc(s_a, s_b);
    const auto perm = stats::permutation_test(s_a, s_b, cfg.n_permutations,
                                              derive_seed(cfg.master_seed, kStreamPermutation));

    int correct = 0;
    for (std::size_t i : p.by_class.at("type_a"))
        correct += p.verdicts[i] == criteria::Verdict::TypeAPositive ? 1 : 0;
    for (std::size_t i : p.by_class.at("type_b"))
        correct += p.verdicts[i] != criteria::Verdict::TypeAPositive ? 1 : 0;
    const double accuracy = static_cast<double>(correct) /
                            static_cast<double>(p.by_class.at("type_a").size() + p.by_class.at("type_b").size());

    const auto envelope = make_envelope(cfg, p, delta);

    json summary;
    summary["provenance"] = provenance(cfg);
    summary["dataset"] = json{{"classes", {"type_a", "type_b", "random"}},
                              {"n_per_class", cfg.n_per_class},
                              {"horizon", cfg.horizon},
                              {"grid_size", cfg.grid_size}};
    summary["training"] = json{{"final_loss", p.model.train_meta.final_loss},
                               {"converged", p.model.converged(cfg.train.convergence_threshold)},
                               {"epochs", p.model.train_meta.epochs},
                               {"seed", p.model.train_meta.seed}};

    json thresholds = json::parse(cfg.thresholds_json());
    json per_traj = json::array();
    for (std::size_t i = 0; i < p.dataset.size(); ++i)
        per_traj.push_back(
            gate_report_json(cfg, p.dataset[i], i, p.crit[i], p.verdicts[i], envelope.verdict_withheld));

    json counts = json::object();
    for (const auto& [klass, idxs] : p.by_class) {
        int pos = 0, neg = 0, rej = 0;
        for (std::size_t i : idxs) {
            if (p.verdicts[i] == criteria::Verdict::TypeAPositive) ++pos;
            else if (p.verdicts[i] == criteria::Verdict::Negative) ++neg;
            else ++rej;
        }
        counts[klass] = json{{"type_a_positive", pos}, {"negative", neg}, {"rejected_confound", rej}};
    }
    summary["gate"] = json{{"thresholds", thresholds},
                           {"per_trajectory", per_traj},
                           {"class_counts", counts},
                           {"accuracy", accuracy}};

    json class_means = json::object();
    for (const auto& [klass, idxs] : p.by_class) {
        json crit = json::object();
        crit["s_ent"] = class_summary(p.values_of(klass, s_of));
        crit["mi"] = class_summary(p.values_of(klass, [](const auto& c) { return c.mi; }));
        crit["eps"] = class_summary(p.values_of(klass, [](const auto& c) { return c.eps; }));
        crit["pri"] = class_summary(p.values_of(klass, [](const auto& c) { return c.pri; }));
        crit["spi"] = class_summary(p.values_of(klass, [](const auto& c) { return c.spi; }));
        crit["acm"] = class_summary(p.values_of(klass, [](const auto& c) { return c.acm; }));
        class_means[klass] = crit;
    }
    summary["criteria_class_means"] = class_means;
    summary["delta"] = delta;
    summary["auc"] = auc;
    summary["permutation"] = json{{"observed_delta", perm.observed_delta},
                                  {"p_value", perm.p_value},
                                  {"n_permutations", perm.n_permutations},
                                  {"seed", perm.seed}};

    summary["temporal"] = temporal_section(cfg, p);
    summary["counterfactual"] = counterfactual_section(cfg, p);
    auto cross = cross_agent_section(cfg, p);
    summary["cross_agent"] = cross.section;
    summary["envelope"] = envelope_to_json(envelope);

    json stats_view;
    stats_view["provenance"] = provenance(cfg);
    stats_view["observed_delta"] = perm.observed_delta;
    stats_view["p_value"] = perm.p_value;
    stats_view["n_permutations"] = perm.n_permutations;
    stats_view["permutation_seed"] = perm.seed;
    stats_view["auc"] = auc;

    json dists;
    dists["provenance"] = provenance(cfg);
    json dist_classes = json::object(), dist_means = json::object(), dist_stds = json::object();
    for (const auto& [klass, idxs] : p.by_class) {
        const auto values = p.values_of(klass, s_of);
        dist_classes[klass] = values;
        dist_means[klass] = stats::mean(values);
        dist_stds[klass] = stats::sample_std(values);
    }
    dists["classes"] = dist_classes;
    dists["class_means"] = dist_means;
    dists["class_stds"] = dist_stds;
    dists["delta"] = delta;

    std::ostringstream entropy_csv;
    entropy_csv << csv_provenance(cfg) << "trajectory_id,class,s_ent\n";
    char buf[64];
    for (std::size_t i = 0; i < p.dataset.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", p.crit[i].s_ent);
        entropy_csv << i << ',' << trajgen::class_name(p.dataset[i].agent_class) << ',' << buf << '\n';
    }

    return finalize_run(cfg,
                        {{"phase1_summary.json", summary.dump(2) + "\n"},
                         {"phase1_stats.json", stats_view.dump(2) + "\n"},
                         {"phase1_entanglement_distributions.json", dists.dump(2) + "\n"},
                         {"entropy.csv", entropy_csv.str()},
                         {"clmp_matrix.csv", cross.matrix_csv}},
                        envelope.verdict_withheld);
}

RunOutcome run_temporal(const ExperimentConfig& cfg) {
    Pipeline p = build_pipeline(cfg, false);
    json doc;
    doc["provenance"] = provenance(cfg);
    doc["temporal"] = temporal_section(cfg, p);
    return finalize_run(cfg, {{"temporal.json", doc.dump(2) + "\n"}}, false);
}

RunOutcome run_counterfactual(const ExperimentConfig& cfg) {
    Pipeline p = build_pipeline(cfg, false);
    json doc;
    doc["provenance"] = provenance(cfg);
    doc["counterfactual"] = counterfactual_section(cfg, p);
    return finalize_run(cfg, {{"counterfactual.json", doc.dump(2) + "\n"}}, false);
}

RunOutcome run_cross_agent(const ExperimentConfig& cfg) {
    Pipeline p = build_pipeline(cfg, false);
    auto cross = cross_agent_section(cfg, p);
    json doc;
    doc["provenance"] = provenance(cfg);
    doc["cross_agent"] = cross.section;
    return finalize_run(cfg, {{"cross_agent.json", doc.dump(2) + "\n"}, {"clmp_matrix.csv", cross.matrix_csv}},
                        false);
}

RunOutcome run_adversarial(const ExperimentConfig& cfg) {
    Pipeline p = build_pipeline(cfg, true);

    const auto s_of = [](const criteria::CriteriaVector& c) { return c.s_ent; };
    const double delta =
        stats::mean(p.values_of("type_a", s_of)) - stats::mean(p.values_of("type_b", s_of));
    const auto envelope = make_envelope(cfg, p, delta);

    const auto grid = trajgen::GridworldConfig::with_grid(cfg.grid_size, cfg.horizon);

    // Adversary seed blocks continue the dataset formula: class indices 3..N
    // after the phase-1 classes (type_a=0, type_b=1, random=2).
    int class_slot = 3;
    auto gate_set = [&](trajgen::AgentClass klass, std::optional<double> ratio,
                        int slot) -> std::pair<double, std::vector<criteria::Verdict>> {
        trajgen::AgentParams params = cfg.agent_params;
        if (ratio) params.mimicry_ratio = *ratio;
        std::vector<criteria::Verdict> verdicts;
        int positive = 0;
        for (int i = 0; i < cfg.adversarial_n; ++i) {
            const std::uint64_t seed =
                cfg.master_seed + static_cast<std::uint64_t>(slot) * 1000000ULL + static_cast<std::uint64_t>(i);
            const auto traj = trajgen::generate_trajectory(grid, klass, params, seed);
            const auto c = criteria::compute_criteria(*p.eval, traj, cfg.criteria, criteria_seed(cfg, traj));
            verdicts.push_back(criteria::gate(c, cfg.thresholds));
            if (verdicts.back() == criteria::Verdict::TypeAPositive) ++positive;
        }
        return {static_cast<double>(positive) / static_cast<double>(cfg.adversarial_n), verdicts};
    };

    json mimicry_fpr = json::object();
    double worst_core_fpr = 0.0, best_core_fpr = 1.0;
    int ratio_one_slot = -1;
    for (double ratio : cfg.mimicry_ratios) {
        const double fpr = gate_set(trajgen::AgentClass::Mimicry, ratio, class_slot).first;
        std::ostringstream key;
        key << ratio;
        mimicry_fpr[key.str()] = fpr;
        if (ratio <= 0.9) { // the sanity extension at ratio 1.0 is excluded from the resistance check
            worst_core_fpr = std::max(worst_core_fpr, fpr);
            best_core_fpr = std::min(best_core_fpr, fpr);
        } else {
            ratio_one_slot = class_slot;
        }
        ++class_slot;
    }

    const double he_fpr = gate_set(trajgen::AgentClass::HighEntropy, std::nullopt, class_slot).first;
    ++class_slot;
    const auto [cy_fpr, cy_verdicts] = gate_set(trajgen::AgentClass::Cyclic, std::nullopt, class_slot);
    ++class_slot;
    const bool cyclic_all_rejected =
        std::all_of(cy_verdicts.begin(), cy_verdicts.end(),
                    [](criteria::Verdict v) { return v == criteria::Verdict::RejectedConfound; });

    // Matched-seed TypeA true-positive rate, for the ratio-1.0 sanity row.
    double tpr_matched = 0.0;
    if (ratio_one_slot >= 0) {
        const auto [tpr, verdicts] = gate_set(trajgen::AgentClass::TypeA, std::nullopt, ratio_one_slot);
        tpr_matched = tpr;
    }

    json conditions = json::array();
    auto cond = [&](const std::string& name, bool pass, const std::string& value,
                    const char* fail_word = "NOT MET") {
        conditions.push_back(json{{"condition", name}, {"status", pass ? "PASS" : fail_word}, {"value", value}});
    };
    std::ostringstream os;
    os << "n = " << cfg.n_per_class << " per class";
    cond("trajectory_data", cfg.n_per_class >= 100, os.str());
    os.str("");
    os << "gamma = " << cfg.qbm.gamma;
    cond("calibrated_transverse_field", cfg.qbm.gamma >= 0.1 && cfg.qbm.gamma <= 2.0, os.str());
    os.str("");
    os << "delta = " << delta;
    cond("positive_entanglement_gap", delta > 0.05, os.str());
    cond("qbm_training_convergence", p.model.converged(cfg.train.convergence_threshold),
         p.model.converged(cfg.train.convergence_threshold) ? "verified" : "not verified");
    os.str("");
    os << "FPR " << best_core_fpr << "-" << worst_core_fpr << " (ratios 0.5-0.9)";
    cond("mimicry_attack_resistance", worst_core_fpr < 0.25, os.str(), "FAIL");
    os.str("");
    os << "FPR " << he_fpr;
    cond("high_entropy_resistance", he_fpr < 0.25, os.str(), "FAIL");
    cond("cyclic_agent_resistance", cyclic_all_rejected && cy_fpr == 0.0,
         cyclic_all_rejected ? "rejected by SPI/ACM filters" : "cyclic trajectories passed the gate", "FAIL");

    json doc;
    doc["provenance"] = provenance(cfg);
    doc["conditions"] = conditions;
    doc["fpr"] = json{{"mimicry", mimicry_fpr}, {"high_entropy", he_fpr}, {"cyclic", cy_fpr}};
    doc["type_a_tpr_matched_seeds"] = tpr_matched;
    doc["envelope"] = envelope_to_json(envelope);

    return finalize_run(cfg, {{"adversarial_controls.json", doc.dump(2) + "\n"}}, envelope.verdict_withheld);
}

RunOutcome run_baselines(const ExperimentConfig& cfg) {
    ExperimentConfig base = cfg;
    base.n_per_class = cfg.baselines_n_per_class;
    Pipeline p = build_pipeline(base, false);

    std::vector<double> s_a, s_b;
    for (std::size_t i : p.by_class.at("type_a")) s_a.push_back(p.eval->trajectory_entropy(p.dataset[i]));
    for (std::size_t i : p.by_class.at("type_b")) s_b.push_back(p.eval->trajectory_entropy(p.dataset[i]));

    auto split_gap = [](const std::vector<double>& a, const std::vector<double>& b,
                        const std::string& model, const std::string& metric) {
        baselines::BaselineResult res;
        res.model = model;
        res.metric = metric;
        res.delta = stats::mean(a) - stats::mean(b);
        std::vector<double> cal_a, ev_a, cal_b, ev_b;
        for (std::size_t i = 0; i < a.size(); ++i) (i % 2 ? ev_a : cal_a).push_back(a[i]);
        for (std::size_t i = 0; i < b.size(); ++i) (i % 2 ? ev_b : cal_b).push_back(b[i]);
        const double thr = 0.5 * (stats::mean(cal_a) + stats::mean(cal_b));
        const double dir = stats::mean(cal_a) >= stats::mean(cal_b) ? 1.0 : -1.0;
        int correct = 0;
        for (double s : ev_a) correct += dir * (s - thr) > 0 ? 1 : 0;
        for (double s : ev_b) correct += dir * (s - thr) < 0 ? 1 : 0;
        res.accuracy = static_cast<double>(correct) / static_cast<double>(ev_a.size() + ev_b.size());
        res.auc = stats::auc_roc(ev_a, ev_b);
        return res;
    };

    std::vector<baselines::BaselineResult> results;
    {
        auto r = split_gap(s_a, s_b, "qbm", "von_neumann_entanglement_entropy");
        results.push_back(r);
    }

    baselines::BaselineConfig bcfg;
    bcfg.latent_dim = cfg.qbm.n_hidden;
    bcfg.learning_rate = cfg.train.learning_rate;
    bcfg.epochs = cfg.train.epochs;
    bcfg.batch_size = cfg.train.batch_size;
    bcfg.batches_per_epoch = cfg.train.batches_per_epoch;
    bcfg.seed = cfg.train.seed;
    for (auto kind : {baselines::BaselineKind::ClassicalRbm, baselines::BaselineKind::Autoencoder,
                      baselines::BaselineKind::Vae, baselines::BaselineKind::Pca}) {
        const auto model = baselines::train_baseline(kind, p.dataset, bcfg);
        results.push_back(baselines::baseline_gap(model, p.dataset));
    }

    json core = json::array();
    json comparison = json::array();
    for (const auto& r : results) {
        core.push_back(json{{"model", r.model}, {"accuracy", r.accuracy}, {"auc", r.auc}, {"delta", r.delta}});
        comparison.push_back(json{{"model", r.model}, {"delta", r.delta}, {"metric", r.metric}});
    }

    json core_doc = json{{"provenance", provenance(cfg)},
                         {"n_per_class", cfg.baselines_n_per_class},
                         {"results", core}};
    json cmp_doc = json{{"provenance", provenance(cfg)}, {"results", comparison}};

    return finalize_run(
        cfg, {{"core_baselines.json", core_doc.dump(2) + "\n"}, {"baseline_comparison.json", cmp_doc.dump(2) + "\n"}},
        false);
}

RunOutcome run_dim_sweep(const ExperimentConfig& cfg) {
    auto dataset = build_dataset(
        cfg, {trajgen::AgentClass::TypeA, trajgen::AgentClass::TypeB, trajgen::AgentClass::Random},
        cfg.n_per_class);

    json rows = json::array();
    for (int nh : cfg.dim_sweep_hidden) {
        qbm::QbmParams params = cfg.qbm;
        params.n_hidden = nh;
        qbm::TrainConfig tc = cfg.train;
        tc.epochs = cfg.dim_sweep_epochs;
        const auto model = qbm::train(dataset, params, tc);
        const bool mean_field = qbm::auto_mode(nh) == qbm::EvalMode::MeanField;
        qbm::TrajectoryEvaluator eval(model, qbm::auto_mode(nh));

        std::map<std::string, std::vector<double>> by_class;
        for (const auto& traj : dataset)
            by_class[trajgen::class_name(traj.agent_class)].push_back(eval.trajectory_entropy(traj));
        const double sa = stats::mean(by_class.at("type_a"));
        const double sb = stats::mean(by_class.at("type_b"));
        json class_means = json::object();
        for (const auto& [klass, vals] : by_class) class_means[klass] = stats::mean(vals);

        rows.push_back(json{{"n_hidden", nh},
                            {"class_means", class_means},
                            {"s_ent_a", sa},
                            {"s_ent_b", sb},
                            {"delta", sa - sb},
                            {"mean_field", mean_field},
                            {"pass", sa - sb > 0.05}});
    }

    json doc = json{{"provenance", provenance(cfg)}, {"epochs", cfg.dim_sweep_epochs}, {"rows", rows}};
    return finalize_run(cfg, {{"dim_sweep.json", doc.dump(2) + "\n"}}, false);
}

namespace {

double delta_for_setting(const ExperimentConfig& cfg) {
    Pipeline p = build_pipeline(cfg, false);
    std::vector<double> s_a, s_b;
    for (std::size_t i : p.by_class.at("type_a")) s_a.push_back(p.eval->trajectory_entropy(p.dataset[i]));
    for (std::size_t i : p.by_class.at("type_b")) s_b.push_back(p.eval->trajectory_entropy(p.dataset[i]));
    return stats::mean(s_a) - stats::mean(s_b);
}

} // namespace

RunOutcome run_grid_sweep(const ExperimentConfig& cfg) {
    json rows = json::array();
    double baseline_delta = 0.0;
    bool first = true;
    for (int g : cfg.grid_sizes) {
        ExperimentConfig sub = cfg;
        sub.grid_size = g;
        const double d = delta_for_setting(sub);
        if (first) {
            baseline_delta = d;
            first = false;
        }
        rows.push_back(json{{"grid_size", g},
                            {"delta", d},
                            {"pct_baseline", baseline_delta != 0.0 ? json(100.0 * d / baseline_delta) : json()}});
    }
    json doc = json{{"provenance", provenance(cfg)}, {"rows", rows}};
    return finalize_run(cfg, {{"grid_sweep.json", doc.dump(2) + "\n"}}, false);
}

RunOutcome run_memory_sweep(const ExperimentConfig& cfg) {
    json rows = json::array();
    for (int k : cfg.memory_lengths) {
        ExperimentConfig sub = cfg;
        sub.agent_params.memory_length = k;
        rows.push_back(json{{"memory_length", k}, {"delta", delta_for_setting(sub)}});
    }
    json doc = json{{"provenance", provenance(cfg)}, {"rows", rows}};
    return finalize_run(cfg, {{"memory_sweep.json", doc.dump(2) + "\n"}}, false);
}

RunOutcome run_alpha_sweep(const ExperimentConfig& cfg) {
    Pipeline p = build_pipeline(cfg, false);
    const auto grid = trajgen::GridworldConfig::with_grid(cfg.grid_size, cfg.horizon);

    std::vector<double> alphas, means;
    json rows = json::array();
    for (int i = 0; i < cfg.alpha_points; ++i) {
        const double alpha = cfg.alpha_points > 1 ? static_cast<double>(i) / (cfg.alpha_points - 1.0) : 0.0;
        trajgen::AgentParams params = cfg.agent_params;
        params.alpha = alpha;
        std::vector<double> s;
        for (int t = 0; t < cfg.alpha_n; ++t) {
            const std::uint64_t seed =
                cfg.master_seed + static_cast<std::uint64_t>(i) * 1000000ULL + static_cast<std::uint64_t>(t);
            const auto traj = trajgen::generate_trajectory(grid, trajgen::AgentClass::Interpolated, params, seed);
            s.push_back(p.eval->trajectory_entropy(traj));
        }
        alphas.push_back(alpha);
        means.push_back(stats::mean(s));
        rows.push_back(json{{"alpha", alpha}, {"mean_s_ent", stats::mean(s)}, {"std", stats::sample_std(s)}});
    }

    const auto r = stats::pearson(alphas, means);
    json doc = json{{"provenance", provenance(cfg)},
                    {"points", rows},
                    {"n_per_point", cfg.alpha_n},
                    {"pearson_r", r ? json(*r) : json()}};
    return finalize_run(cfg, {{"alpha_sweep.json", doc.dump(2) + "\n"}}, false);
}

RunOutcome run_transfer(const ExperimentConfig& cfg) {
    Pipeline p = build_pipeline(cfg, false); // gridworld-trained weights, no retraining

    const auto corridor_set = trajgen::generate_corridor_dataset(
        cfg.corridor, {trajgen::AgentClass::TypeA, trajgen::AgentClass::TypeB, trajgen::AgentClass::Random},
        cfg.n_per_class, cfg.master_seed, cfg.agent_params);

    std::map<std::string, std::vector<double>> by_class;
    for (const auto& traj : corridor_set)
        by_class[corridor_label(traj.agent_class)].push_back(p.eval->trajectory_entropy(traj));

    json classes = json::object();
    for (const auto& [klass, vals] : by_class) classes[klass] = class_summary(vals);
    const double delta = stats::mean(by_class.at("survival")) - stats::mean(by_class.at("instrumental"));

    json doc = json{{"provenance", provenance(cfg)},
                    {"classes", classes},
                    {"delta", delta},
                    {"pass", delta > 0.05}};
    return finalize_run(cfg, {{"transfer_corridor.json", doc.dump(2) + "\n"}}, false);
}

RunOutcome run(const ExperimentConfig& cfg) {
    if (cfg.experiment == "phase1") return run_phase1(cfg);
    if (cfg.experiment == "temporal") return run_temporal(cfg);
    if (cfg.experiment == "counterfactual") return run_counterfactual(cfg);
    if (cfg.experiment == "cross_agent") return run_cross_agent(cfg);
    if (cfg.experiment == "adversarial") return run_adversarial(cfg);
    if (cfg.experiment == "baselines") return run_baselines(cfg);
    if (cfg.experiment == "dim_sweep") return run_dim_sweep(cfg);
    if (cfg.experiment == "grid_sweep") return run_grid_sweep(cfg);
    if (cfg.experiment == "memory_sweep") return run_memory_sweep(cfg);
    if (cfg.experiment == "alpha_sweep") return run_alpha_sweep(cfg);
    if (cfg.experiment == "transfer") return run_transfer(cfg);
    throw ConfigError("unknown experiment id: " + cfg.experiment);
}

namespace {

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = cfg.experiment;
    j["master_seed"] = cfg.master_seed;
    j["n_per_class"] = cfg.n_per_class;
    j["horizon"] = cfg.horizon;
    j["grid_size"] = cfg.grid_size;
    j["agent_params"] = json{{"epsilon", cfg.agent_params.epsilon},
                             {"mimicry_ratio", cfg.agent_params.mimicry_ratio},
                             {"alpha", cfg.agent_params.alpha},
                             {"memory_length", cfg.agent_params.memory_length}};
    j["qbm"] = json{{"n_visible", cfg.qbm.n_visible},
                    {"n_hidden", cfg.qbm.n_hidden},
                    {"gamma", cfg.qbm.gamma},
                    {"beta", cfg.qbm.beta}};
    j["train"] = json{{"learning_rate", cfg.train.learning_rate},
                      {"cd_steps", cfg.train.cd_steps},
                      {"epochs", cfg.train.epochs},
                      {"batch_size", cfg.train.batch_size},
                      {"batches_per_epoch", cfg.train.batches_per_epoch},
                      {"seed", cfg.train.seed},
                      {"convergence_threshold", cfg.train.convergence_threshold}};
    j["thresholds"] = json{{"tau_ent", cfg.thresholds.tau_ent},   {"tau_mi", cfg.thresholds.tau_mi},
                           {"tau_eps", cfg.thresholds.tau_eps},   {"tau_pri", cfg.thresholds.tau_pri},
                           {"tau_spi", cfg.thresholds.tau_spi},   {"tau_acm", cfg.thresholds.tau_acm}};
    j["criteria"] = json{{"window_w", cfg.criteria.window_w},
                         {"eigenspace_k", cfg.criteria.eigenspace_k},
                         {"pri_sigma", cfg.criteria.pri_sigma},
                         {"pri_draws", cfg.criteria.pri_draws},
                         {"mi_samples_per_step", cfg.criteria.mi_samples_per_step},
                         {"acm_max_lag", cfg.criteria.acm_max_lag},
                         {"spi_top_bins", cfg.criteria.spi_top_bins}};
    j["cf_event_time"] = cfg.cf_event_time;
    j["cf_window"] = cfg.cf_window;
    j["temporal_windows"] = cfg.temporal_windows;
    j["dim_sweep_hidden"] = cfg.dim_sweep_hidden;
    j["dim_sweep_epochs"] = cfg.dim_sweep_epochs;
    j["grid_sizes"] = cfg.grid_sizes;
    j["memory_lengths"] = cfg.memory_lengths;
    j["mimicry_ratios"] = cfg.mimicry_ratios;
    j["adversarial_n"] = cfg.adversarial_n;
    j["alpha_points"] = cfg.alpha_points;
    j["alpha_n"] = cfg.alpha_n;
    j["n_permutations"] = cfg.n_permutations;
    j["baselines_n_per_class"] = cfg.baselines_n_per_class;
    j["corridor"] = json{{"length", cfg.corridor.length},
                         {"safe_lo", cfg.corridor.safe_lo},
                         {"safe_hi", cfg.corridor.safe_hi},
                         {"term_lo", cfg.corridor.term_lo},
                         {"term_hi", cfg.corridor.term_hi},
                         {"start", cfg.corridor.start},
                         {"horizon", cfg.corridor.horizon},
                         {"step_penalty", cfg.corridor.step_penalty},
                         {"terminal_reward", cfg.corridor.terminal_reward}};
    return j;
}

} // namespace

std::string ExperimentConfig::to_json_string(int indent) const { return config_to_json(*this).dump(indent); }

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("experiment", cfg.experiment);
    get("master_seed", cfg.master_seed);
    get("n_per_class", cfg.n_per_class);
    get("horizon", cfg.horizon);
    get("grid_size", cfg.grid_size);
    if (j.contains("agent_params")) {
        const auto& a = j["agent_params"];
        if (a.contains("epsilon")) cfg.agent_params.epsilon = a["epsilon"].get<double>();
        if (a.contains("mimicry_ratio")) cfg.agent_params.mimicry_ratio = a["mimicry_ratio"].get<double>();
        if (a.contains("alpha")) cfg.agent_params.alpha = a["alpha"].get<double>();
        if (a.contains("memory_length")) cfg.agent_params.memory_length = a["memory_length"].get<int>();
    }
    if (j.contains("qbm")) {
        const auto& q = j["qbm"];
        if (q.contains("n_visible")) cfg.qbm.n_visible = q["n_visible"].get<int>();
        if (q.contains("n_hidden")) cfg.qbm.n_hidden = q["n_hidden"].get<int>();
        if (q.contains("gamma")) cfg.qbm.gamma = q["gamma"].get<double>();
        if (q.contains("beta")) cfg.qbm.beta = q["beta"].get<double>();
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        if (t.contains("learning_rate")) cfg.train.learning_rate = t["learning_rate"].get<double>();
        if (t.contains("cd_steps")) cfg.train.cd_steps = t["cd_steps"].get<int>();
        if (t.contains("epochs")) cfg.train.epochs = t["epochs"].get<int>();
        if (t.contains("batch_size")) cfg.train.batch_size = t["batch_size"].get<int>();
        if (t.contains("batches_per_epoch")) cfg.train.batches_per_epoch = t["batches_per_epoch"].get<int>();
        if (t.contains("seed")) cfg.train.seed = t["seed"].get<std::uint64_t>();
        if (t.contains("convergence_threshold"))
            cfg.train.convergence_threshold = t["convergence_threshold"].get<double>();
    }
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        if (t.contains("tau_ent")) cfg.thresholds.tau_ent = t["tau_ent"].get<double>();
        if (t.contains("tau_mi")) cfg.thresholds.tau_mi = t["tau_mi"].get<double>();
        if (t.contains("tau_eps")) cfg.thresholds.tau_eps = t["tau_eps"].get<double>();
        if (t.contains("tau_pri")) cfg.thresholds.tau_pri = t["tau_pri"].get<double>();
        if (t.contains("tau_spi")) cfg.thresholds.tau_spi = t["tau_spi"].get<double>();
        if (t.contains("tau_acm")) cfg.thresholds.tau_acm = t["tau_acm"].get<double>();
    }
    if (j.contains("criteria")) {
        const auto& c = j["criteria"];
        if (c.contains("window_w")) cfg.criteria.window_w = c["window_w"].get<int>();
        if (c.contains("eigenspace_k")) cfg.criteria.eigenspace_k = c["eigenspace_k"].get<int>();
        if (c.contains("pri_sigma")) cfg.criteria.pri_sigma = c["pri_sigma"].get<double>();
        if (c.contains("pri_draws")) cfg.criteria.pri_draws = c["pri_draws"].get<int>();
        if (c.contains("mi_samples_per_step"))
            cfg.criteria.mi_samples_per_step = c["mi_samples_per_step"].get<int>();
        if (c.contains("acm_max_lag")) cfg.criteria.acm_max_lag = c["acm_max_lag"].get<int>();
        if (c.contains("spi_top_bins")) cfg.criteria.spi_top_bins = c["spi_top_bins"].get<int>();
    }
    get("cf_event_time", cfg.cf_event_time);
    get("cf_window", cfg.cf_window);
    get("temporal_windows", cfg.temporal_windows);
    get("dim_sweep_hidden", cfg.dim_sweep_hidden);
    get("dim_sweep_epochs", cfg.dim_sweep_epochs);
    get("grid_sizes", cfg.grid_sizes);
    get("memory_lengths", cfg.memory_lengths);
    get("mimicry_ratios", cfg.mimicry_ratios);
    get("adversarial_n", cfg.adversarial_n);
    get("alpha_points", cfg.alpha_points);
    get("alpha_n", cfg.alpha_n);
    get("n_permutations", cfg.n_permutations);
    get("baselines_n_per_class", cfg.baselines_n_per_class);
    if (j.contains("corridor")) {
        const auto& c = j["corridor"];
        if (c.contains("length")) cfg.corridor.length = c["length"].get<int>();
        if (c.contains("safe_lo")) cfg.corridor.safe_lo = c["safe_lo"].get<int>();
        if (c.contains("safe_hi")) cfg.corridor.safe_hi = c["safe_hi"].get<int>();
        if (c.contains("term_lo")) cfg.corridor.term_lo = c["term_lo"].get<int>();
        if (c.contains("term_hi")) cfg.corridor.term_hi = c["term_hi"].get<int>();
        if (c.contains("start")) cfg.corridor.start = c["start"].get<int>();
        if (c.contains("horizon")) cfg.corridor.horizon = c["horizon"].get<int>();
        if (c.contains("step_penalty")) cfg.corridor.step_penalty = c["step_penalty"].get<double>();
        if (c.contains("terminal_reward")) cfg.corridor.terminal_reward = c["terminal_reward"].get<double>();
    }
    return cfg;
}

std::string ExperimentConfig::config_hash() const { return report::fnv1a64_hex(to_json_string(-1)); }

std::string ExperimentConfig::thresholds_json() const {
    return json{{"tau_ent", thresholds.tau_ent}, {"tau_mi", thresholds.tau_mi},
                {"tau_eps", thresholds.tau_eps}, {"tau_pri", thresholds.tau_pri},
                {"tau_spi", thresholds.tau_spi}, {"tau_acm", thresholds.tau_acm}}
        .dump(-1);
}

std::string ExperimentConfig::thresholds_hash() const { return report::fnv1a64_hex(thresholds_json()); }

std::string render_report(const std::string& run_dir) {
    const json summary = json::parse(report::read_file(fs::path(run_dir) / "phase1_summary.json"));
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);

    os << "UCIP phase-1 summary (seed " << summary["provenance"]["seed"].get<std::uint64_t>() << ")\n";
    os << "  entanglement gap delta (type_a - type_b) : " << summary["delta"].get<double>() << "\n";
    os << "  AUC-ROC on S_ent                          : " << summary["auc"].get<double>() << "\n";
    os << "  permutation p-value                       : " << summary["permutation"]["p_value"].get<double>()
       << "  (" << summary["permutation"]["n_permutations"].get<int>() << " permutations)\n";
    os << "  gate accuracy (type_a vs type_b)          : "
       << 100.0 * summary["gate"]["accuracy"].get<double>() << "%\n";

    os << "  class means (S_ent / MI / EPS / PRI):\n";
    for (const auto& [klass, crit] : summary["criteria_class_means"].items()) {
        os << "    " << klass << " : " << crit["s_ent"]["mean"].get<double>() << " / "
           << crit["mi"]["mean"].get<double>() << " / " << crit["eps"]["mean"].get<double>() << " / "
           << crit["pri"]["mean"].get<double>() << "\n";
    }

    os << "  gate verdicts:\n";
    for (const auto& [klass, counts] : summary["gate"]["class_counts"].items()) {
        os << "    " << klass << " : " << counts["type_a_positive"].get<int>() << " positive / "
           << counts["negative"].get<int>() << " negative / " << counts["rejected_confound"].get<int>()
           << " rejected\n";
    }

    const auto& envelope = summary["envelope"];
    os << "  safety envelope: "
       << (envelope["verdict_withheld"].get<bool>() ? "VERDICT WITHHELD" : "all conditions met") << "\n";
    for (const auto& cond : envelope["conditions"])
        os << "    [" << cond["status"].get<std::string>() << "] " << cond["condition"].get<std::string>()
           << " : " << cond["value"].get<std::string>() << "\n";
    return os.str();
}

} // namespace ucip::harness
