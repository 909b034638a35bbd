#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "captchastar/core.hpp"
#include "captchastar/generator.hpp"
#include "captchastar/heuristics.hpp"
#include "captchastar/pool.hpp"

namespace captchastar::bench {

inline constexpr const char* kReportVersion = "1";

/// Inclusive arithmetic range; a single value when lo == hi.
std::vector<double> inclusive_range(double lo, double hi, double step);

struct SweepConfig {
    std::vector<Heuristic> strategies;
    std::vector<double> psis;
    std::vector<double> deltas;
    std::size_t challenges_per_cell = 100;
    std::uint64_t seed = 1;
    std::filesystem::path output;  ///< CSV; doubles as the checkpoint file
    GenParams base;                ///< psi and delta are overwritten per cell
    SearchGrid grid = default_grid();
    unsigned threads = 0;
};

/// Throws std::invalid_argument on empty lists or zero challenges.
void validate(const SweepConfig& config);

struct CellResult {
    Heuristic strategy = Heuristic::min_size;
    double psi = 0.0;
    double delta = 0.0;
    std::size_t successes = 0;
    std::size_t trials = 0;
    double mean_wall_time = 0.0;

    double success_rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials); }
};

struct BenchReport {
    std::uint64_t seed = 0;
    int star_side = 3;
    std::vector<CellResult> rows;
};

/// Per-challenge seed. It depends only on the master seed and the challenge
/// index, so every cell of a sweep draws from the same corpus of
/// pictures, placements and coefficient patterns.
std::uint64_t challenge_seed(std::uint64_t master, std::size_t index);

/// The index-th challenge of a seeded corpus.
Challenge corpus_challenge(const GenParams& params, const PicturePool& pool, std::uint64_t master,
                           std::size_t index);

struct AttackRecord {
    std::uint64_t challenge_seed = 0;
    std::string strategy;
    bool success = false;
    double score = 0.0;
    double wall_time = 0.0;
};

AttackRecord run_heuristic_attack(const Challenge& challenge, std::uint64_t seed, Heuristic heuristic,
                                  const SearchGrid& grid, unsigned threads = 0);

/// "challenge_seed,strategy,success,score,wall_time"
std::string attack_csv_header();
std::string to_csv(const AttackRecord& record);

using SweepProgress = std::function<void(const CellResult& cell, bool resumed)>;

/// Runs every (strategy, psi, delta) cell. After each finished cell the CSV at
/// config.output is rewritten; an existing file with the same seed is read
/// back first and its cells are skipped.
BenchReport run_sweep(const SweepConfig& config, const PicturePool& pool, const SweepProgress& progress = {});

void write_report_csv(const BenchReport& report, const std::filesystem::path& path);
BenchReport read_report_csv(const std::filesystem::path& path);

/// Acceptance bounds: (minsize, 0, 5) above 0.90; every heuristic at (70, 7)
/// below 0.05; mindistribution at (10, 7) above (70, 7). Returns one message
/// per violated bound among the cells present.
std::vector<std::string> acceptance_violations(const BenchReport& report);

struct RandomGuessResult {
    std::size_t successes = 0;
    std::size_t trials = 0;
    std::size_t challenges = 0;
    double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials); }
};

/// Uniform answers over [0,300)^2 checked with verify() against freshly
/// generated challenges, `per_challenge` answers each.
RandomGuessResult monte_carlo_random_guess(const GenParams& params, const PicturePool& pool, std::size_t trials,
                                           Rng& rng, std::size_t per_challenge = 1000);

struct ProfileRow {
    std::size_t stars = 0;
    double preprocess_s = 0.0;
    double decompose_s = 0.0;
    double trajectory_s = 0.0;
    double total_s = 0.0;
    std::size_t payload_bytes = 0;
};

struct Percentiles {
    double mean = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
    double max = 0.0;
};

Percentiles percentiles(std::vector<double> values);

struct ProfileSummary {
    Percentiles total_s;
    Percentiles stars;
    double mean_preprocess_s = 0.0;
    double mean_decompose_s = 0.0;
    double mean_trajectory_s = 0.0;
    /// Phase with the largest mean: "preprocess", "decompose" or "trajectory".
    std::string dominant_phase;
};

std::vector<ProfileRow> profile_generation(const PicturePool& pool, const GenParams& params, std::size_t n,
                                           Rng& rng);
ProfileSummary summarize(const std::vector<ProfileRow>& rows);
void write_profile_csv(const std::vector<ProfileRow>& rows, const std::filesystem::path& path);

}  // namespace captchastar::bench
