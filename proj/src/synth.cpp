#include "viewgrade/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <string>

namespace viewgrade {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string padded(char prefix, int index, int count)
{
    const int width = static_cast<int>(std::to_string(std::max(count - 1, 0)).size());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*d", prefix, width, index);
    return buf;
}

}  // namespace

std::string submission_id(int index, int count) { return padded('s', index, count); }
std::string grader_id(int index, int count) { return padded('g', index, count); }
std::string view_id(int index) { return "view" + std::to_string(index + 1); }

std::mt19937_64 derive_stream(std::uint64_t seed, std::string_view label)
{
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ fnv1a(label)));
}

void SynthConfig::check() const
{
    if (n_graders < 2 || n_submissions < 2) {
        throw ConfigError("need at least 2 graders and 2 submissions");
    }
    if (n_views < 1) {
        throw ConfigError("n_views must be >= 1");
    }
    if (static_cast<int>(view_weights.size()) != n_views) {
        throw ConfigError("view_weights must have n_views entries");
    }
    for (const double w : view_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError("view weights must be nonnegative");
        }
    }
    if (!(truth_sd >= 0.0)) {
        throw ConfigError("truth_sd must be nonnegative");
    }
    if (!(gamma_shape > 0.0) || !(gamma_scale > 0.0)) {
        throw ConfigError("gamma_shape and gamma_scale must be positive");
    }
    if (static_cast<int>(bias_counts.size()) != n_views) {
        throw ConfigError("bias_counts must have n_views entries");
    }
    for (const int c : bias_counts) {
        if (c < 0 || c > n_graders) {
            throw ConfigError("bias_counts entries must lie in [0, n_graders]");
        }
    }
    if (!(bias_offset_low >= 0.0) || !(bias_offset_high >= bias_offset_low)) {
        throw ConfigError("bias offsets need 0 <= bias_offset_low <= bias_offset_high");
    }
    if (reviews_per_grader < 2 || reviews_per_grader > n_submissions
        || static_cast<long long>(n_graders) * reviews_per_grader < 2LL * n_submissions) {
        throw ConfigError("cannot satisfy degree >= 2 with the given graders/submissions/reviews");
    }
}

ReviewGraph assign_reviews(int n_submissions, int n_graders, int reviews_per_grader, std::uint64_t seed)
{
    const int r = reviews_per_grader;
    if (n_submissions < 1 || n_graders < 1 || r < 2
        || static_cast<long long>(n_graders) * r < 2LL * n_submissions) {
        throw ConfigError("cannot satisfy degree >= 2");
    }
    if (r > n_submissions) {
        throw ConfigError("cannot assign " + std::to_string(r) + " distinct submissions out of "
                          + std::to_string(n_submissions));
    }

    auto rng = derive_stream(seed, "assignment");
    const auto total = static_cast<std::size_t>(n_graders) * static_cast<std::size_t>(r);
    const auto block = [r](std::size_t pos) { return pos / static_cast<std::size_t>(r); };

    for (int attempt = 0; attempt < 100; ++attempt) {
        // Stacked permutations keep every submission's count within one of the others.
        std::vector<int> slots;
        slots.reserve(total);
        std::vector<int> perm(static_cast<std::size_t>(n_submissions));
        while (slots.size() < total) {
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            const auto take = std::min(perm.size(), total - slots.size());
            slots.insert(slots.end(), perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(take));
        }

        const auto block_has = [&](std::size_t b, int value, std::size_t except) {
            for (std::size_t p = b * r; p < (b + 1) * r; ++p) {
                if (p != except && slots[p] == value) {
                    return true;
                }
            }
            return false;
        };

        bool repaired = true;
        for (std::size_t p = 0; p < total && repaired; ++p) {
            const auto b = block(p);
            if (!block_has(b, slots[p], p)) {
                continue;
            }
            // Swap the duplicate with a slot from another block where neither side collides.
            repaired = false;
            const auto start = static_cast<std::size_t>(rng() % total);
            for (std::size_t k = 0; k < total; ++k) {
                const auto q = (start + k) % total;
                const auto bq = block(q);
                if (bq == b || slots[q] == slots[p]) {
                    continue;
                }
                if (!block_has(b, slots[q], p) && !block_has(bq, slots[p], q)) {
                    std::swap(slots[p], slots[q]);
                    repaired = true;
                    break;
                }
            }
        }
        if (!repaired) {
            continue;
        }

        std::vector<Edge> edges;
        edges.reserve(total);
        for (std::size_t p = 0; p < total; ++p) {
            edges.emplace_back(submission_id(slots[p], n_submissions),
                               grader_id(static_cast<int>(block(p)), n_graders));
        }
        auto g = ReviewGraph::from_edges(edges);
        for (int i = 0; i < n_submissions; ++i) {
            g.submissions.insert(submission_id(i, n_submissions));
        }
        return g;
    }
    throw ConfigError("could not build a duplicate-free assignment");
}

SyntheticCohort generate(const SynthConfig& cfg)
{
    cfg.check();

    SyntheticCohort out;
    Dataset& d = out.dataset;
    d.graph = assign_reviews(cfg.n_submissions, cfg.n_graders, cfg.reviews_per_grader, cfg.seed);
    d.truth = TruthTable{};

    std::vector<Id> submissions(d.graph.submissions.begin(), d.graph.submissions.end());
    std::vector<Id> graders(d.graph.graders.begin(), d.graph.graders.end());

    for (int v = 0; v < cfg.n_views; ++v) {
        ViewSpec spec;
        spec.id = view_id(v);
        spec.label = "View " + std::to_string(v + 1);
        spec.scale_min = cfg.truth_mean - 10.0;
        spec.scale_max = cfg.truth_mean + 10.0;
        spec.weight = cfg.view_weights[static_cast<std::size_t>(v)];
        d.views.push_back(spec);

        auto truth_rng = derive_stream(cfg.seed, "truth/" + spec.id);
        std::normal_distribution<double> truth_dist(cfg.truth_mean, cfg.truth_sd);
        std::map<Id, double> truth;
        for (const auto& s : submissions) {
            // truth_sd == 0 is allowed; normal_distribution needs a positive sigma.
            const double q = cfg.truth_sd > 0.0 ? truth_dist(truth_rng) : cfg.truth_mean;
            truth[s] = q;
            (*d.truth)[{s, spec.id}] = q;
        }

        auto var_rng = derive_stream(cfg.seed, "variance/" + spec.id);
        std::gamma_distribution<double> var_dist(cfg.gamma_shape, cfg.gamma_scale);
        for (const auto& j : graders) {
            out.profile[{j, spec.id}].true_variance = var_dist(var_rng);
        }

        auto bias_rng = derive_stream(cfg.seed, "bias/" + spec.id);
        std::vector<Id> pool = graders;
        std::shuffle(pool.begin(), pool.end(), bias_rng);
        std::uniform_real_distribution<double> magnitude(cfg.bias_offset_low, cfg.bias_offset_high);
        std::bernoulli_distribution negative(0.5);
        for (int b = 0; b < cfg.bias_counts[static_cast<std::size_t>(v)]; ++b) {
            const double m = magnitude(bias_rng);
            out.profile[{pool[static_cast<std::size_t>(b)], spec.id}].injected_offset = negative(bias_rng) ? -m : m;
        }

        auto noise_rng = derive_stream(cfg.seed, "noise/" + spec.id);
        std::normal_distribution<double> unit(0.0, 1.0);
        for (const auto& [s, j] : d.graph.edges) {
            const auto& profile = out.profile.at({j, spec.id});
            const double noise = std::sqrt(profile.true_variance) * unit(noise_rng);
            d.grades.push_back({j, s, spec.id, truth.at(s) + noise + profile.injected_offset});
        }
    }
    return out;
}

}  // namespace viewgrade
