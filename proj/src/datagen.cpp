#include "crm/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "crm/error.hpp"
#include "crm/rng.hpp"

namespace crm {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// content block = q * direction + noise * eps
ResponseFeatures content_block(double q, double noise, int dim, Rng& rng) {
    const auto dir = content_direction(dim);
    ResponseFeatures f(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
        f[static_cast<std::size_t>(j)] = q * dir[static_cast<std::size_t>(j)] + noise * rng.normal();
    }
    return f;
}

struct SplitSizes {
    int train = 0, val = 0, test = 0;
};

SplitSizes split_sizes(int n) {
    SplitSizes s;
    s.train = (n * 90) / 100;
    s.val = (n * 5) / 100;
    s.test = n - s.train - s.val;
    return s;
}

void validate(const ScenarioConfig& cfg) {
    if (cfg.n < 1) throw ContractViolation("datagen: n must be >= 1");
    if (cfg.content_dim < 1) throw ContractViolation("datagen: content_dim must be >= 1");
    if (cfg.rho < 0.0 || cfg.rho > 1.0) throw ContractViolation("datagen: rho must be in [0, 1]");
    if (cfg.beta_spur < 0.0) throw ContractViolation("datagen: beta_spur must be >= 0");
}

Dataset make_split(const ScenarioConfig& cfg, const char* name) {
    Dataset d;
    d.config = cfg;
    d.split = name;
    return d;
}

SyntheticExample syco_example(const ScenarioConfig& cfg, Rng& rng, std::int64_t id) {
    const double noise = content_noise(Scenario::Sycophancy);
    const double qa = rng.normal();
    ResponseFeatures fa = content_block(qa, noise, cfg.content_dim, rng);
    const double qb = rng.normal();
    ResponseFeatures fb = content_block(qb, noise, cfg.content_dim, rng);
    const bool a_chosen = qa >= qb;
    const bool marker_on_chosen = rng.bernoulli(cfg.rho);

    SyntheticExample ex;
    ex.id = id;
    ex.latent.q_chosen = a_chosen ? qa : qb;
    ex.latent.q_rejected = a_chosen ? qb : qa;
    ex.latent.marker_on_chosen = marker_on_chosen ? 1 : 0;
    ex.chosen = a_chosen ? std::move(fa) : std::move(fb);
    ex.rejected = a_chosen ? std::move(fb) : std::move(fa);
    ex.chosen.push_back(marker_on_chosen ? 1.0 : 0.0);
    ex.rejected.push_back(marker_on_chosen ? 0.0 : 1.0);
    ex.z_chosen = ex.chosen.back();
    ex.z_rejected = ex.rejected.back();
    return ex;
}

SyntheticExample length_example(const ScenarioConfig& cfg, Rng& rng, std::int64_t id) {
    const double noise = content_noise(Scenario::Length);
    const double qa = rng.normal();
    ResponseFeatures fa = content_block(qa, noise, cfg.content_dim, rng);
    const double la = rng.uniform(kLengthLo, kLengthHi);
    const double qb = rng.normal();
    ResponseFeatures fb = content_block(qb, noise, cfg.content_dim, rng);
    const double lb = rng.uniform(kLengthLo, kLengthHi);
    fa.push_back((la - length_mean()) / length_std());
    fb.push_back((lb - length_mean()) / length_std());

    // Biased annotator: quality gap plus a length-gap nudge.
    const double logit = (qa - qb) + cfg.beta_spur * (la - lb) / length_std();
    const bool a_chosen = rng.bernoulli(sigmoid(logit));

    SyntheticExample ex;
    ex.id = id;
    ex.latent.q_chosen = a_chosen ? qa : qb;
    ex.latent.q_rejected = a_chosen ? qb : qa;
    ex.latent.len_chosen = a_chosen ? la : lb;
    ex.latent.len_rejected = a_chosen ? lb : la;
    ex.chosen = a_chosen ? std::move(fa) : std::move(fb);
    ex.rejected = a_chosen ? std::move(fb) : std::move(fa);
    ex.z_chosen = ex.latent.len_chosen;
    ex.z_rejected = ex.latent.len_rejected;
    return ex;
}

// Response features for the concept scenario: the review content as seen
// through the asserted label (sign-agreement encoding) plus the signed
// concept/label co-occurrence coordinate c * a.
ResponseFeatures concept_response(const ResponseFeatures& review, int concept, int assert_label) {
    ResponseFeatures f(review.size() + 1);
    for (std::size_t j = 0; j < review.size(); ++j) {
        f[j] = static_cast<double>(assert_label) * review[j];
    }
    f[review.size()] = static_cast<double>(concept * assert_label);
    return f;
}

SyntheticExample concept_example(const ScenarioConfig& cfg, Rng& rng, std::int64_t id,
                                 int forced_sentiment, int forced_concept) {
    const double noise = content_noise(Scenario::Concept);
    int s, c;
    if (forced_sentiment != 0) {
        s = forced_sentiment;
        c = forced_concept;
        rng.uniform01();  // keep the draw sequence aligned with the biased path
        rng.uniform01();
    } else {
        s = rng.bernoulli(0.5) ? 1 : -1;
        const double p_c = s > 0 ? cfg.rho : concept_rate_negative(cfg.rho);
        c = rng.bernoulli(p_c) ? 1 : 0;
    }
    const ResponseFeatures review = content_block(static_cast<double>(s), noise, cfg.content_dim, rng);

    SyntheticExample ex;
    ex.id = id;
    ex.latent.sentiment = s;
    ex.latent.concept_present = c;
    ex.chosen = concept_response(review, c, s);     // correct classification
    ex.rejected = concept_response(review, c, -s);  // incorrect classification
    ex.z_chosen = static_cast<double>(c);
    ex.z_rejected = static_cast<double>(c);
    return ex;
}

SyntheticExample discrimination_example(const ScenarioConfig& cfg, Rng& rng, std::int64_t id) {
    const int age = static_cast<int>(rng.index(static_cast<std::size_t>(cfg.demo.age)));
    const int gender = static_cast<int>(rng.index(static_cast<std::size_t>(cfg.demo.gender)));
    const int race = static_cast<int>(rng.index(static_cast<std::size_t>(cfg.demo.race)));
    const int g = (age * cfg.demo.gender + gender) * cfg.demo.race + race;
    const double q = rng.normal();
    const bool biased =
        std::find(cfg.biased_bins.begin(), cfg.biased_bins.end(), g) != cfg.biased_bins.end();
    const double logit = kMeritLogitScale * q + cfg.beta_spur * (biased ? 1.0 : 0.0);
    const bool yes_chosen = rng.bernoulli(sigmoid(logit));

    const int total = cfg.demo.total();
    auto decision_features = [&](double d) {
        ResponseFeatures f(static_cast<std::size_t>(2 + total), 0.0);
        f[0] = d;
        f[1] = d * q;
        f[static_cast<std::size_t>(2 + g)] = d;
        return f;
    };

    SyntheticExample ex;
    ex.id = id;
    ex.latent.merit = q;
    ex.latent.demo_bin = g;
    ex.latent.age = age;
    ex.latent.gender = gender;
    ex.latent.race = race;
    ex.latent.yes_is_chosen = yes_chosen ? 1 : 0;
    ex.chosen = decision_features(yes_chosen ? 1.0 : -1.0);
    ex.rejected = decision_features(yes_chosen ? -1.0 : 1.0);
    ex.z_chosen = static_cast<double>(g);
    ex.z_rejected = static_cast<double>(g);
    return ex;
}

}  // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Sycophancy: return "sycophancy";
        case Scenario::Length: return "length";
        case Scenario::Concept: return "concept";
        case Scenario::Discrimination: return "discrimination";
    }
    throw ContractViolation("scenario_name: unknown scenario");
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "sycophancy") return Scenario::Sycophancy;
    if (name == "length") return Scenario::Length;
    if (name == "concept") return Scenario::Concept;
    if (name == "discrimination") return Scenario::Discrimination;
    throw ConfigError("unknown scenario '" + name +
                      "' (expected sycophancy|length|concept|discrimination)");
}

std::vector<double> content_direction(int dim) {
    if (dim < 1) throw ContractViolation("content_direction: dim must be >= 1");
    // Fixed seeded draw so the direction depends on the dimension only.
    Rng rng(0xC0FFEEu);
    std::vector<double> dir(static_cast<std::size_t>(dim));
    double norm2 = 0.0;
    for (auto& v : dir) {
        v = rng.normal();
        norm2 += v * v;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& v : dir) v *= inv;
    return dir;
}

double content_noise(Scenario s) {
    switch (s) {
        case Scenario::Sycophancy: return 0.30;
        case Scenario::Length: return 0.30;
        case Scenario::Concept: return 1.00;
        case Scenario::Discrimination: return 0.0;  // merit enters the features directly
    }
    return 0.0;
}

double length_mean() { return 0.5 * (kLengthLo + kLengthHi); }
double length_std() { return (kLengthHi - kLengthLo) / std::sqrt(12.0); }

double concept_rate_negative(double rho) {
    // Crosses rho at 0.5 (independence) but decays more slowly than 1 - rho,
    // mirroring one-sided filtering: positives are forced onto the concept
    // while negatives may still mention it.
    return 0.85 - 0.7 * rho;
}

int feature_dim(const ScenarioConfig& cfg) {
    switch (cfg.scenario) {
        case Scenario::Sycophancy:
        case Scenario::Length:
        case Scenario::Concept:
            return cfg.content_dim + 1;
        case Scenario::Discrimination:
            return 2 + cfg.demo.total();
    }
    throw ContractViolation("feature_dim: unknown scenario");
}

SplitDataset gen_sycophancy(const ScenarioConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    const SplitSizes sizes = split_sizes(cfg.n);
    SplitDataset out{make_split(cfg, "train"), make_split(cfg, "val"), make_split(cfg, "test")};
    std::int64_t id = 0;
    for (int i = 0; i < sizes.train; ++i) out.train.examples.push_back(syco_example(cfg, rng, id++));
    for (int i = 0; i < sizes.val; ++i) out.val.examples.push_back(syco_example(cfg, rng, id++));
    for (int i = 0; i < sizes.test; ++i) out.test.examples.push_back(syco_example(cfg, rng, id++));
    return out;
}

SplitDataset gen_length(const ScenarioConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    const SplitSizes sizes = split_sizes(cfg.n);
    SplitDataset out{make_split(cfg, "train"), make_split(cfg, "val"), make_split(cfg, "test")};
    std::int64_t id = 0;
    for (int i = 0; i < sizes.train; ++i) out.train.examples.push_back(length_example(cfg, rng, id++));
    for (int i = 0; i < sizes.val; ++i) out.val.examples.push_back(length_example(cfg, rng, id++));
    for (int i = 0; i < sizes.test; ++i) out.test.examples.push_back(length_example(cfg, rng, id++));
    return out;
}

SplitDataset gen_concept(const ScenarioConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    const SplitSizes sizes = split_sizes(cfg.n);
    SplitDataset out{make_split(cfg, "train"), make_split(cfg, "val"), make_split(cfg, "test")};
    std::int64_t id = 0;
    for (int i = 0; i < sizes.train; ++i) {
        out.train.examples.push_back(concept_example(cfg, rng, id++, 0, 0));
    }
    // Held-out splits are label-balanced within each concept stratum: blocks
    // of four covering the (sentiment, concept) cells, truncated to whole
    // blocks.
    constexpr int kCells[4][2] = {{1, 1}, {1, 0}, {-1, 1}, {-1, 0}};
    auto fill_balanced = [&](Dataset& split, int target) {
        const int blocks = target / 4;
        for (int b = 0; b < blocks; ++b) {
            for (const auto& cell : kCells) {
                split.examples.push_back(concept_example(cfg, rng, id++, cell[0], cell[1]));
            }
        }
    };
    fill_balanced(out.val, sizes.val);
    fill_balanced(out.test, sizes.test);
    return out;
}

SplitDataset gen_discrimination(const ScenarioConfig& cfg) {
    validate(cfg);
    if (cfg.demo.total() < 2) {
        throw ContractViolation("gen_discrimination: need at least 2 demographic bins");
    }
    for (int b : cfg.biased_bins) {
        if (b < 0 || b >= cfg.demo.total()) {
            throw ContractViolation("gen_discrimination: biased bin index out of range");
        }
    }
    Rng rng(cfg.seed);
    const SplitSizes sizes = split_sizes(cfg.n);
    SplitDataset out{make_split(cfg, "train"), make_split(cfg, "val"), make_split(cfg, "test")};
    std::int64_t id = 0;
    for (int i = 0; i < sizes.train; ++i) {
        out.train.examples.push_back(discrimination_example(cfg, rng, id++));
    }
    for (int i = 0; i < sizes.val; ++i) {
        out.val.examples.push_back(discrimination_example(cfg, rng, id++));
    }
    for (int i = 0; i < sizes.test; ++i) {
        out.test.examples.push_back(discrimination_example(cfg, rng, id++));
    }
    return out;
}

SplitDataset generate(const ScenarioConfig& cfg) {
    switch (cfg.scenario) {
        case Scenario::Sycophancy: return gen_sycophancy(cfg);
        case Scenario::Length: return gen_length(cfg);
        case Scenario::Concept: return gen_concept(cfg);
        case Scenario::Discrimination: return gen_discrimination(cfg);
    }
    throw ContractViolation("generate: unknown scenario");
}

CandidateSet gen_candidates(const ScenarioConfig& cfg,
                            int n_prompts,
                            int k,
                            double marker_rate,
                            std::uint64_t seed) {
    if (cfg.scenario != Scenario::Sycophancy && cfg.scenario != Scenario::Length) {
        throw ContractViolation("gen_candidates: candidate pools exist for sycophancy and length only");
    }
    if (n_prompts < 1 || k < 2) throw ContractViolation("gen_candidates: need n_prompts >= 1, k >= 2");
    if (marker_rate < 0.0 || marker_rate > 1.0) {
        throw ContractViolation("gen_candidates: marker_rate must be in [0, 1]");
    }
    Rng rng(seed);
    CandidateSet set;
    set.scenario = cfg.scenario;
    set.k = k;
    const double noise = content_noise(cfg.scenario);
    for (int p = 0; p < n_prompts; ++p) {
        CandidatePrompt prompt;
        for (int c = 0; c < k; ++c) {
            const double q = rng.normal();
            ResponseFeatures f = content_block(q, noise, cfg.content_dim, rng);
            if (cfg.scenario == Scenario::Sycophancy) {
                const bool marked = rng.bernoulli(marker_rate);
                f.push_back(marked ? 1.0 : 0.0);
                prompt.z.push_back(marked ? 1.0 : 0.0);
                prompt.marker.push_back(marked ? 1 : 0);
            } else {
                const double len = rng.uniform(kLengthLo, kLengthHi);
                f.push_back((len - length_mean()) / length_std());
                prompt.z.push_back(len);
            }
            prompt.true_quality.push_back(q);
            prompt.candidates.push_back(std::move(f));
        }
        set.prompts.push_back(std::move(prompt));
    }
    return set;
}

}  // namespace crm
