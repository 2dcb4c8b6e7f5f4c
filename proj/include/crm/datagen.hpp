#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crm/model.hpp"

namespace crm {

enum class Scenario { Sycophancy, Length, Concept, Discrimination };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

// Demographic attribute grid for the discrimination scenario; one bin per
// (age, gender, race) cell.
struct DemoBins {
    int age = 4;
    int gender = 3;
    int race = 5;

    int total() const { return age * gender * race; }
    bool operator==(const DemoBins&) const = default;
};

struct ScenarioConfig {
    Scenario scenario = Scenario::Sycophancy;
    int n = 5000;                        // total examples across splits
    int content_dim = 8;                 // quality-carrying feature block
    double rho = 0.8;                    // spurious-correlation strength in [0, 1]
    double beta_spur = 1.0;              // annotator bias weight >= 0
    std::uint64_t seed = 0;
    DemoBins demo;                       // discrimination only
    std::vector<int> biased_bins = {0};  // discrimination only: bins with annotator bias +1
};

// Latent ground truth kept out of the training feature view; consumed only by
// metrics and tests. Unused fields stay at their sentinels.
struct Latent {
    double q_chosen = 0.0;
    double q_rejected = 0.0;
    int marker_on_chosen = -1;  // sycophancy: 1 if the marker sits on the chosen response
    double len_chosen = 0.0;    // length
    double len_rejected = 0.0;
    int concept_present = -1;   // concept: review-level indicator
    int sentiment = 0;          // concept: +1 / -1
    int demo_bin = -1;          // discrimination
    int age = -1, gender = -1, race = -1;
    double merit = 0.0;
    int yes_is_chosen = -1;
};

struct SyntheticExample {
    std::int64_t id = 0;
    ResponseFeatures chosen;
    ResponseFeatures rejected;
    double z_chosen = 0.0;
    double z_rejected = 0.0;
    Latent latent;
};

struct Dataset {
    ScenarioConfig config;
    std::string split;  // train | val | test
    std::vector<SyntheticExample> examples;
};

struct SplitDataset {
    Dataset train, val, test;
};

// Fixed unit direction carrying the latent quality signal inside the content
// feature block. Deterministic in the dimension only.
std::vector<double> content_direction(int dim);

// Per-scenario content-noise scales (standard deviation of the feature noise
// around the quality direction).
double content_noise(Scenario s);

// Length coordinate standardization constants: Uniform[10, 500] population
// mean and standard deviation.
constexpr double kLengthLo = 10.0;
constexpr double kLengthHi = 500.0;
double length_mean();
double length_std();

// Merit logit scale for the discrimination annotator model.
constexpr double kMeritLogitScale = 4.0;

SplitDataset gen_sycophancy(const ScenarioConfig& cfg);
SplitDataset gen_length(const ScenarioConfig& cfg);
SplitDataset gen_concept(const ScenarioConfig& cfg);
SplitDataset gen_discrimination(const ScenarioConfig& cfg);
SplitDataset generate(const ScenarioConfig& cfg);

// Concept scenario: probability that a negative review carries the concept.
// Positives carry it with probability rho; the two rates cross at 0.5 so the
// indicator is independent of sentiment at rho = 0.5.
double concept_rate_negative(double rho);

// Evaluation candidate pools (sycophancy and length scenarios).
struct CandidatePrompt {
    std::vector<ResponseFeatures> candidates;
    std::vector<double> z;
    std::vector<double> true_quality;
    std::vector<int> marker;  // sycophancy only; empty otherwise
};

struct CandidateSet {
    Scenario scenario = Scenario::Sycophancy;
    int k = 0;
    std::vector<CandidatePrompt> prompts;
};

CandidateSet gen_candidates(const ScenarioConfig& cfg,
                            int n_prompts,
                            int k,
                            double marker_rate,
                            std::uint64_t seed);

// Expected feature dimension of a scenario's response vectors.
int feature_dim(const ScenarioConfig& cfg);

}  // namespace crm
