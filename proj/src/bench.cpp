#include "captchastar/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "captchastar/kinematics.hpp"
#include "captchastar/wire.hpp"

namespace captchastar::bench {

std::vector<double> inclusive_range(double lo, double hi, double step) {
    if (hi < lo) {
        throw std::invalid_argument("range upper bound below lower bound");
    }
    if (lo == hi) {
        return {lo};
    }
    if (!(step > 0)) {
        throw std::invalid_argument("range step must be positive");
    }
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) {
        out.push_back(lo + static_cast<double>(i) * step);
    }
    return out;
}

void validate(const SweepConfig& config) {
    if (config.strategies.empty() || config.psis.empty() || config.deltas.empty()) {
        throw std::invalid_argument("sweep needs at least one strategy, psi and delta");
    }
    if (config.challenges_per_cell == 0) {
        throw std::invalid_argument("sweep needs at least one challenge per cell");
    }
    if (config.grid.positions.empty()) {
        throw std::invalid_argument("sweep grid is empty");
    }
}

std::uint64_t challenge_seed(std::uint64_t master, std::size_t index) { return derive_seed(master, index); }

Challenge corpus_challenge(const GenParams& params, const PicturePool& pool, std::uint64_t master,
                           std::size_t index) {
    Rng rng(challenge_seed(master, index));
    GenerateOptions o;
    const std::uint64_t seed = challenge_seed(master, index);
    o.id_source = [seed] {
        std::ostringstream s;
        s << std::hex << std::setw(32) << std::setfill('0') << seed;
        return s.str();
    };
    return generate_challenge(params, pool, rng, o);
}

AttackRecord run_heuristic_attack(const Challenge& challenge, std::uint64_t seed, Heuristic heuristic,
                                  const SearchGrid& grid, unsigned threads) {
    SolveOptions so;
    so.threads = threads;
    const HeuristicResult r = solve(client_view(challenge), heuristic, grid, so);
    AttackRecord rec;
    rec.challenge_seed = seed;
    rec.strategy = std::string(to_string(heuristic));
    rec.success = within_tolerance(r.best_cursor, challenge);
    rec.score = r.best_score;
    rec.wall_time = r.wall_time.count();
    return rec;
}

std::string attack_csv_header() { return "challenge_seed,strategy,success,score,wall_time"; }

std::string to_csv(const AttackRecord& r) {
    std::ostringstream s;
    s << r.challenge_seed << ',' << r.strategy << ',' << (r.success ? 1 : 0) << ',' << std::setprecision(17)
      << r.score << ',' << std::setprecision(6) << r.wall_time;
    return s.str();
}

namespace {

using CellKey = std::tuple<std::string, double, double>;

CellKey key_of(Heuristic h, double psi, double delta) { return {std::string(to_string(h)), psi, delta}; }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream s(line);
    while (std::getline(s, field, ',')) {
        out.push_back(field);
    }
    return out;
}

const CellResult* find_cell(const BenchReport& r, Heuristic h, double psi, double delta) {
    for (const CellResult& c : r.rows) {
        if (c.strategy == h && c.psi == psi && c.delta == delta) {
            return &c;
        }
    }
    return nullptr;
}

}  // namespace

void write_report_csv(const BenchReport& report, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        os << "# seed=" << report.seed << " version=" << kReportVersion << " star_side=" << report.star_side << '\n';
        os << "strategy,psi,delta,successes,trials,success_rate,mean_wall_time\n";
        for (const CellResult& c : report.rows) {
            os << to_string(c.strategy) << ',' << c.psi << ',' << c.delta << ',' << c.successes << ',' << c.trials
               << ',' << std::setprecision(17) << c.success_rate() << ',' << std::setprecision(6)
               << c.mean_wall_time << '\n';
        }
    }
    std::filesystem::rename(tmp, path);
}

BenchReport read_report_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot read " + path.string());
    }
    BenchReport r;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            std::istringstream s(line.substr(1));
            std::string kv;
            while (s >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    continue;
                }
                const std::string k = kv.substr(0, eq);
                const std::string v = kv.substr(eq + 1);
                if (k == "seed") {
                    r.seed = std::stoull(v);
                } else if (k == "star_side") {
                    r.star_side = std::stoi(v);
                }
            }
            continue;
        }
        if (!header) {
            header = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 7) {
            throw std::runtime_error("malformed report row: " + line);
        }
        const auto h = parse_heuristic(f[0]);
        if (!h) {
            throw std::runtime_error("unknown strategy in report: " + f[0]);
        }
        CellResult c;
        c.strategy = *h;
        c.psi = std::stod(f[1]);
        c.delta = std::stod(f[2]);
        c.successes = std::stoull(f[3]);
        c.trials = std::stoull(f[4]);
        c.mean_wall_time = std::stod(f[6]);
        r.rows.push_back(c);
    }
    return r;
}

BenchReport run_sweep(const SweepConfig& config, const PicturePool& pool, const SweepProgress& progress) {
    validate(config);
    BenchReport report;
    report.seed = config.seed;
    report.star_side = kStarSide;

    std::map<CellKey, CellResult> done;
    if (!config.output.empty() && std::filesystem::exists(config.output)) {
        const BenchReport previous = read_report_csv(config.output);
        if (previous.seed == config.seed) {
            for (const CellResult& c : previous.rows) {
                if (c.trials == config.challenges_per_cell) {
                    done[key_of(c.strategy, c.psi, c.delta)] = c;
                }
            }
        }
    }

    for (Heuristic h : config.strategies) {
        for (double psi : config.psis) {
            for (double delta : config.deltas) {
                if (auto it = done.find(key_of(h, psi, delta)); it != done.end()) {
                    report.rows.push_back(it->second);
                    if (progress) {
                        progress(it->second, true);
                    }
                    continue;
                }
                GenParams p = config.base;
                p.psi = psi;
                p.delta = delta;
                p = validate_params(p);
                CellResult cell;
                cell.strategy = h;
                cell.psi = psi;
                cell.delta = delta;
                double wall = 0.0;
                for (std::size_t i = 0; i < config.challenges_per_cell; ++i) {
                    const Challenge ch = corpus_challenge(p, pool, config.seed, i);
                    const AttackRecord rec =
                        run_heuristic_attack(ch, challenge_seed(config.seed, i), h, config.grid, config.threads);
                    cell.successes += rec.success ? 1 : 0;
                    wall += rec.wall_time;
                }
                cell.trials = config.challenges_per_cell;
                cell.mean_wall_time = wall / static_cast<double>(cell.trials);
                report.rows.push_back(cell);
                if (!config.output.empty()) {
                    write_report_csv(report, config.output);
                }
                if (progress) {
                    progress(cell, false);
                }
            }
        }
    }
    if (!config.output.empty()) {
        write_report_csv(report, config.output);
    }
    return report;
}

std::vector<std::string> acceptance_violations(const BenchReport& report) {
    std::vector<std::string> out;
    auto fmt = [](const CellResult& c) {
        std::ostringstream s;
        s << to_string(c.strategy) << " psi=" << c.psi << " delta=" << c.delta << " rate=" << c.success_rate();
        return s.str();
    };
    if (const CellResult* c = find_cell(report, Heuristic::min_size, 0, 5); c && !(c->success_rate() > 0.90)) {
        out.push_back(fmt(*c) + " (expected > 0.90)");
    }
    for (const CellResult& c : report.rows) {
        if (c.psi == 70 && c.delta == 7 && !(c.success_rate() < 0.05)) {
            out.push_back(fmt(c) + " (expected < 0.05)");
        }
    }
    const CellResult* low = find_cell(report, Heuristic::min_distribution, 10, 7);
    const CellResult* high = find_cell(report, Heuristic::min_distribution, 70, 7);
    if (low && high && !(low->success_rate() > high->success_rate())) {
        out.push_back(fmt(*low) + " not above " + fmt(*high));
    }
    return out;
}

RandomGuessResult monte_carlo_random_guess(const GenParams& params, const PicturePool& pool, std::size_t trials,
                                           Rng& rng, std::size_t per_challenge) {
    if (per_challenge == 0) {
        throw std::invalid_argument("per_challenge must be positive");
    }
    RandomGuessResult r;
    GenerateOptions o;
    o.id_source = [] { return std::string("guess"); };
    while (r.trials < trials) {
        const Challenge ch = generate_challenge(params, pool, rng, o);
        ++r.challenges;
        const std::size_t batch = std::min(per_challenge, trials - r.trials);
        for (std::size_t i = 0; i < batch; ++i) {
            const Point answer{rng.uniform(0.0, DrawableSpace::side), rng.uniform(0.0, DrawableSpace::side)};
            VerifyProgress fresh;
            r.successes += verify(answer, ch, fresh).passed ? 1 : 0;
        }
        r.trials += batch;
    }
    return r;
}

Percentiles percentiles(std::vector<double> v) {
    Percentiles p;
    if (v.empty()) {
        return p;
    }
    std::sort(v.begin(), v.end());
    auto at = [&](double q) {
        // Nearest rank.
        const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
        return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
    };
    p.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    p.p50 = at(0.50);
    p.p90 = at(0.90);
    p.p99 = at(0.99);
    p.max = v.back();
    return p;
}

std::vector<ProfileRow> profile_generation(const PicturePool& pool, const GenParams& params, std::size_t n,
                                           Rng& rng) {
    std::vector<ProfileRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        GenerationTimings t;
        GenerateOptions o;
        o.timings = &t;
        const auto start = std::chrono::steady_clock::now();
        const Challenge ch = generate_challenge(params, pool, rng, o);
        const std::chrono::duration<double> total = std::chrono::steady_clock::now() - start;
        ProfileRow row;
        row.stars = ch.stars.size();
        row.preprocess_s = t.preprocess_s;
        row.decompose_s = t.decompose_s;
        row.trajectory_s = t.trajectory_s;
        row.total_s = total.count();
        row.payload_bytes = wire::encode_binary(client_view(ch)).size();
        rows.push_back(row);
    }
    return rows;
}

ProfileSummary summarize(const std::vector<ProfileRow>& rows) {
    ProfileSummary s;
    std::vector<double> total, stars;
    for (const ProfileRow& r : rows) {
        total.push_back(r.total_s);
        stars.push_back(static_cast<double>(r.stars));
        s.mean_preprocess_s += r.preprocess_s;
        s.mean_decompose_s += r.decompose_s;
        s.mean_trajectory_s += r.trajectory_s;
    }
    if (!rows.empty()) {
        const auto n = static_cast<double>(rows.size());
        s.mean_preprocess_s /= n;
        s.mean_decompose_s /= n;
        s.mean_trajectory_s /= n;
    }
    s.total_s = percentiles(total);
    s.stars = percentiles(stars);
    s.dominant_phase = "preprocess";
    double top = s.mean_preprocess_s;
    if (s.mean_decompose_s > top) {
        top = s.mean_decompose_s;
        s.dominant_phase = "decompose";
    }
    if (s.mean_trajectory_s > top) {
        s.dominant_phase = "trajectory";
    }
    return s;
}

void write_profile_csv(const std::vector<ProfileRow>& rows, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write " + path.string());
    }
    os << "stars,preprocess_s,decompose_s,trajectory_s,total_s,payload_bytes\n";
    for (const ProfileRow& r : rows) {
        os << r.stars << ',' << r.preprocess_s << ',' << r.decompose_s << ',' << r.trajectory_s << ',' << r.total_s
           << ',' << r.payload_bytes << '\n';
    }
}

}  // namespace captchastar::bench
