#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "captchastar/bench.hpp"
#include "captchastar/generator.hpp"
#include "captchastar/golden.hpp"
#include "captchastar/heuristics.hpp"
#include "captchastar/kinematics.hpp"
#include "captchastar/ml/attack.hpp"
#include "captchastar/ml/kmeans.hpp"
#include "captchastar/ml/model_file.hpp"
#include "captchastar/ml/training.hpp"
#include "captchastar/pool.hpp"
#include "captchastar/service/http_server.hpp"
#include "captchastar/wire.hpp"

using namespace captchastar;

namespace {

struct PoolArgs {
    std::string dir;
    std::size_t synthetic = 200;
    std::uint64_t synthetic_seed = 42;

    void add(CLI::App* app) {
        app->add_option("--pool", dir, "Directory of PNG pictures");
        app->add_option("--synthetic", synthetic, "Procedural icons to use when --pool is not given");
        app->add_option("--synthetic-seed", synthetic_seed, "Seed of the procedural icons");
    }

    std::shared_ptr<const PicturePool> open() const {
        if (!dir.empty()) {
            return std::make_shared<DirectoryPool>(dir);
        }
        return make_synthetic_pool(synthetic, synthetic_seed);
    }
};

struct ParamArgs {
    GenParams p;
    std::string policy = "any-of";

    void add(CLI::App* app, bool with_psi_delta = true) {
        if (with_psi_delta) {
            app->add_option("--psi", p.psi, "Noise percentage");
            app->add_option("--delta", p.delta, "Sensitivity");
        }
        app->add_option("--nsol", p.nsol, "Number of hidden shapes");
        app->add_option("--pic-size", p.pic_size, "Picture size after resize");
        app->add_flag("--rotation", p.rotation, "Rotate pictures randomly");
        app->add_option("--tolerance", p.tolerance, "Accepted distance to a solution");
        app->add_option("--policy", policy, "any-of or all-of")->check(CLI::IsMember({"any-of", "all-of"}));
    }

    GenParams get() const {
        GenParams out = p;
        out.solution_policy = parse_solution_policy(policy);
        return validate_params(out);
    }
};

std::ostream* open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") {
        return &std::cout;
    }
    file.open(path);
    if (!file) {
        throw std::runtime_error("cannot write " + path);
    }
    return &file;
}

std::vector<double> parse_range(const std::string& text) {
    // lo[:hi[:step]]
    std::vector<double> parts;
    std::stringstream s(text);
    std::string item;
    while (std::getline(s, item, ':')) {
        parts.push_back(std::stod(item));
    }
    if (parts.size() == 1) {
        return {parts[0]};
    }
    if (parts.size() == 3) {
        return bench::inclusive_range(parts[0], parts[1], parts[2]);
    }
    throw std::invalid_argument("range must be 'value' or 'lo:hi:step': " + text);
}

service::HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server != nullptr) {
        g_server->stop();
    }
}

int cmd_serve(const std::string& config_path, const std::optional<std::string>& pool_dir,
              const std::optional<std::string>& host, const std::optional<int>& port,
              const std::optional<int>& ttl, const std::optional<std::string>& encoding,
              const std::optional<std::string>& static_dir, const std::optional<int>& rate_limit,
              const std::optional<std::size_t>& prebuffer, const std::optional<std::uint64_t>& seed,
              const PoolArgs& pool_args) {
    service::ServiceConfig cfg;
    if (!config_path.empty()) {
        cfg = service::load_config_file(config_path, cfg);
    }
    cfg = service::apply_env(cfg, service::process_env());
    if (pool_dir) cfg.pool_dir = *pool_dir;
    if (host) cfg.host = *host;
    if (port) cfg.port = *port;
    if (ttl) cfg.ttl_seconds = *ttl;
    if (encoding) cfg.encoding = wire::parse_encoding(*encoding);
    if (static_dir) cfg.static_dir = *static_dir;
    if (rate_limit) cfg.rate_limit_per_minute = *rate_limit;
    if (prebuffer) cfg.prebuffer = *prebuffer;
    if (seed) cfg.seed = *seed;
    service::check_config(cfg);

    std::shared_ptr<const PicturePool> pool;
    if (!cfg.pool_dir.empty()) {
        pool = std::make_shared<DirectoryPool>(cfg.pool_dir);
    } else {
        pool = pool_args.open();
    }
    service::CaptchaService svc(cfg, pool);
    service::HttpServer server(svc);
    const int bound = server.bind(cfg.host, cfg.port);
    svc.start_background();
    std::cerr << "listening on " << cfg.host << ':' << bound << " with " << pool->size() << " pictures\n";
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run();
    g_server = nullptr;
    svc.stop();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interactive shape-discovery CAPTCHA: server, generator and attack toolkit"};
    app.require_subcommand(1);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string config_path;
    std::optional<std::string> s_pool, s_host, s_encoding, s_static;
    std::optional<int> s_port, s_ttl, s_rate;
    std::optional<std::size_t> s_prebuffer;
    std::optional<std::uint64_t> s_seed;
    PoolArgs serve_pool;
    serve->add_option("--config", config_path, "JSON config file");
    serve->add_option("--pool-dir", s_pool, "Directory of PNG pictures");
    serve->add_option("--host", s_host, "Listen address");
    serve->add_option("--port", s_port, "Listen port (0 picks one)");
    serve->add_option("--ttl", s_ttl, "Challenge lifetime in seconds");
    serve->add_option("--encoding", s_encoding, "json or binary");
    serve->add_option("--static-dir", s_static, "Directory served at /");
    serve->add_option("--rate-limit", s_rate, "Challenges per client per minute, 0 disables");
    serve->add_option("--prebuffer", s_prebuffer, "Pre-generated challenges to keep ready");
    serve->add_option("--seed", s_seed, "Fixed generation seed (testing only)");
    serve->add_option("--synthetic", serve_pool.synthetic, "Procedural icons when no pool dir is set");

    // make-pool
    auto* make_pool = app.add_subcommand("make-pool", "Write procedural icons as PNG files");
    std::string mp_out;
    std::size_t mp_count = 200;
    std::uint64_t mp_seed = 42;
    make_pool->add_option("--out", mp_out, "Output directory")->required();
    make_pool->add_option("--count", mp_count, "Number of icons");
    make_pool->add_option("--seed", mp_seed, "Icon seed");

    // generate
    auto* gen = app.add_subcommand("generate", "Generate one challenge and print its wire payload");
    PoolArgs gen_pool;
    ParamArgs gen_params;
    std::uint64_t gen_seed = 1;
    std::string gen_encoding = "json";
    std::string gen_out;
    bool gen_reveal = false;
    gen_pool.add(gen);
    gen_params.add(gen);
    gen->add_option("--seed", gen_seed, "Generation seed");
    gen->add_option("--encoding", gen_encoding, "json or binary")->check(CLI::IsMember({"json", "binary"}));
    gen->add_option("--out", gen_out, "Output file (default stdout)");
    gen->add_flag("--reveal", gen_reveal, "Print the solutions to stderr");

    // attack
    auto* attack = app.add_subcommand("attack", "Run an automated solver over seeded challenges");
    PoolArgs at_pool;
    ParamArgs at_params;
    std::string at_strategy;
    std::size_t at_challenges = 100;
    std::uint64_t at_seed = 1;
    int at_grid_step = 1;
    unsigned at_threads = 0;
    std::string at_model, at_out;
    at_pool.add(attack);
    at_params.add(attack);
    attack->add_option("--strategy", at_strategy, "minsize|mindistribution|minsumdist|allsumdist|ml")->required();
    attack->add_option("--challenges", at_challenges, "Number of challenges");
    attack->add_option("--seed", at_seed, "Master seed");
    attack->add_option("--grid-step", at_grid_step, "Heuristic search grid step");
    attack->add_option("--threads", at_threads, "Worker threads (0: all cores)");
    attack->add_option("--model", at_model, "Model file for --strategy ml");
    attack->add_option("--out", at_out, "CSV output (default stdout)");

    // ml-train
    auto* train = app.add_subcommand("ml-train", "Train the tile-histogram classifier");
    PoolArgs tr_pool;
    ParamArgs tr_params;
    int tr_omega = 15;
    std::size_t tr_challenges = 60, tr_states = 400, tr_corpus_challenges = 20, tr_corpus_states = 200;
    std::uint64_t tr_seed = 1;
    std::string tr_out, tr_kind = "logistic";
    unsigned tr_threads = 0;
    tr_pool.add(train);
    tr_params.add(train);
    train->add_option("--omega", tr_omega, "Tile side (divides 300)");
    train->add_option("--challenges", tr_challenges, "Training challenges");
    train->add_option("--states", tr_states, "States per training challenge");
    train->add_option("--corpus-challenges", tr_corpus_challenges, "Challenges for the k-means corpus");
    train->add_option("--corpus-states", tr_corpus_states, "States for the k-means corpus");
    train->add_option("--classifier", tr_kind, "forest or logistic")->check(CLI::IsMember({"forest", "logistic"}));
    train->add_option("--seed", tr_seed, "Seed");
    train->add_option("--threads", tr_threads, "Feature extraction threads");
    train->add_option("--out", tr_out, "Model file")->required();

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Parameter sweeps and security statistics");
    bench_cmd->require_subcommand(1);
    auto* sweep = bench_cmd->add_subcommand("sweep", "Success rate per (strategy, psi, delta) cell");
    PoolArgs sw_pool;
    ParamArgs sw_params;
    std::string sw_strategies = "minsize,mindistribution,minsumdist,allsumdist";
    std::string sw_psi = "70", sw_delta = "7", sw_out = "sweep.csv";
    std::size_t sw_challenges = 100;
    bool sw_full = false;
    std::uint64_t sw_seed = 1;
    int sw_grid_step = 1;
    unsigned sw_threads = 0;
    sw_pool.add(sweep);
    sw_params.add(sweep, false);
    sweep->add_option("--strategies", sw_strategies, "Comma-separated heuristics");
    sweep->add_option("--psi", sw_psi, "value or lo:hi:step");
    sweep->add_option("--delta", sw_delta, "value or lo:hi:step");
    sweep->add_option("--challenges", sw_challenges, "Challenges per cell");
    sweep->add_flag("--full", sw_full, "Use 250 challenges per cell");
    sweep->add_option("--seed", sw_seed, "Master seed");
    sweep->add_option("--grid-step", sw_grid_step, "Search grid step");
    sweep->add_option("--threads", sw_threads, "Worker threads");
    sweep->add_option("--out", sw_out, "CSV report, also the resume checkpoint");

    auto* guess = bench_cmd->add_subcommand("random-guess", "Monte Carlo success rate of uniform answers");
    PoolArgs rg_pool;
    ParamArgs rg_params;
    std::size_t rg_trials = 100000, rg_per = 1000;
    std::uint64_t rg_seed = 1;
    rg_pool.add(guess);
    rg_params.add(guess);
    guess->add_option("--trials", rg_trials, "Number of guesses")->check(CLI::Range(std::size_t{10000}, std::size_t{1} << 40));
    guess->add_option("--per-challenge", rg_per, "Guesses per generated challenge");
    guess->add_option("--seed", rg_seed, "Seed");

    auto* profile = bench_cmd->add_subcommand("profile", "Generation time and payload size statistics");
    PoolArgs pf_pool;
    ParamArgs pf_params;
    std::size_t pf_n = 100;
    std::uint64_t pf_seed = 1;
    std::string pf_out = "profile.csv";
    pf_pool.add(profile);
    pf_params.add(profile);
    profile->add_option("-n,--challenges", pf_n, "Challenges to generate")->check(CLI::Range(10, 1000000));
    profile->add_option("--seed", pf_seed, "Seed");
    profile->add_option("--out", pf_out, "CSV output");

    // golden
    auto* golden = app.add_subcommand("golden", "Write client parity vectors");
    PoolArgs gd_pool;
    GoldenOptions gd;
    std::string gd_out;
    gd_pool.add(golden);
    golden->add_option("--seed", gd.seed, "Seed");
    golden->add_option("--challenges", gd.challenges, "Challenges");
    golden->add_option("--cursors", gd.cursors_per_challenge, "Cursor positions per challenge");
    golden->add_option("--pic-size", gd.pic_size, "Picture size");
    golden->add_option("--out", gd_out, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            return cmd_serve(config_path, s_pool, s_host, s_port, s_ttl, s_encoding, s_static, s_rate, s_prebuffer,
                             s_seed, serve_pool);
        }
        if (*make_pool) {
            write_synthetic_pool(mp_out, mp_count, mp_seed);
            std::cerr << "wrote " << mp_count << " icons to " << mp_out << '\n';
            return 0;
        }
        if (*gen) {
            const auto pool = gen_pool.open();
            Rng rng(gen_seed);
            const Challenge ch = generate_challenge(gen_params.get(), *pool, rng);
            const ClientChallenge view = client_view(ch);
            std::ofstream file;
            std::ostream& os = *open_out(gen_out, file);
            if (gen_encoding == "json") {
                os << wire::encode_json(view) << '\n';
            } else {
                const auto bytes = wire::encode_binary(view);
                os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            }
            std::cerr << ch.stars.size() << " stars (" << ch.original_count() << " original)\n";
            if (gen_reveal) {
                for (const Point& s : ch.solutions) {
                    std::cerr << "solution " << s.x << ' ' << s.y << '\n';
                }
            }
            return 0;
        }
        if (*attack) {
            const auto pool = at_pool.open();
            const GenParams params = at_params.get();
            std::ofstream file;
            std::ostream& os = *open_out(at_out, file);
            os << bench::attack_csv_header() << '\n';
            std::optional<ml::Model> model;
            std::optional<Heuristic> heuristic;
            if (at_strategy == "ml") {
                if (at_model.empty()) {
                    throw std::invalid_argument("--strategy ml needs --model");
                }
                model = ml::load_model(at_model);
            } else {
                heuristic = parse_heuristic(at_strategy);
                if (!heuristic) {
                    throw std::invalid_argument("unknown strategy '" + at_strategy + "'");
                }
            }
            const SearchGrid grid = square_grid(5, 294, at_grid_step);
            std::size_t wins = 0;
            for (std::size_t i = 0; i < at_challenges; ++i) {
                const std::uint64_t seed = bench::challenge_seed(at_seed, i);
                const Challenge ch = bench::corpus_challenge(params, *pool, at_seed, i);
                bench::AttackRecord rec;
                if (heuristic) {
                    rec = bench::run_heuristic_attack(ch, seed, *heuristic, grid, at_threads);
                } else {
                    ml::MlSolveOptions mo;
                    mo.threads = at_threads;
                    const ml::MlResult r = ml::ml_solve(client_view(ch), *model->classifier, model->refs, mo);
                    rec.challenge_seed = seed;
                    rec.strategy = "ml";
                    rec.success = within_tolerance(r.cursor, ch);
                    rec.score = r.score;
                    rec.wall_time = r.wall_time.count();
                }
                wins += rec.success ? 1 : 0;
                os << bench::to_csv(rec) << '\n' << std::flush;
            }
            std::cerr << at_strategy << ": " << wins << '/' << at_challenges << " solved\n";
            return 0;
        }
        if (*train) {
            const auto pool = tr_pool.open();
            const GenParams params = tr_params.get();
            Rng rng(tr_seed);
            const auto corpus = ml::sample_tile_corpus(*pool, params, tr_omega, tr_corpus_challenges,
                                                       tr_corpus_states, rng);
            std::cerr << "k-means corpus: " << corpus.size() << " distinct tiles\n";
            ml::Model model;
            model.refs = ml::build_reference_tiles(corpus, tr_omega, rng);
            ml::TrainingOptions to;
            to.threads = tr_threads;
            const auto examples = ml::build_training_set(*pool, params, tr_challenges, tr_states, model.refs, rng, to);
            std::cerr << "training set: " << examples.size() << " examples\n";
            model.classifier = ml::make_classifier(tr_kind, derive_seed(tr_seed, 1));
            model.classifier->fit(ml::to_dataset(examples));
            model.metadata = nlohmann::json{{"omega", tr_omega},
                                            {"challenges", tr_challenges},
                                            {"states_per_challenge", tr_states},
                                            {"psi", params.psi},
                                            {"delta", params.delta},
                                            {"pic_size", params.pic_size},
                                            {"seed", tr_seed},
                                            {"classifier", tr_kind}}
                                 .dump();
            ml::save_model(model, tr_out);
            std::cerr << "saved " << tr_out << '\n';
            return 0;
        }
        if (*sweep) {
            const auto pool = sw_pool.open();
            bench::SweepConfig cfg;
            std::stringstream names(sw_strategies);
            std::string name;
            while (std::getline(names, name, ',')) {
                const auto h = parse_heuristic(name);
                if (!h) {
                    throw std::invalid_argument("unknown strategy '" + name + "'");
                }
                cfg.strategies.push_back(*h);
            }
            cfg.psis = parse_range(sw_psi);
            cfg.deltas = parse_range(sw_delta);
            cfg.challenges_per_cell = sw_full ? 250 : sw_challenges;
            cfg.seed = sw_seed;
            cfg.output = sw_out;
            cfg.base = sw_params.get();
            cfg.grid = square_grid(5, 294, sw_grid_step);
            cfg.threads = sw_threads;
            const bench::BenchReport report = bench::run_sweep(cfg, *pool, [](const bench::CellResult& c, bool resumed) {
                std::cout << to_string(c.strategy) << " psi=" << c.psi << " delta=" << c.delta << ": "
                          << c.successes << '/' << c.trials << " (" << 100.0 * c.success_rate() << "%)"
                          << (resumed ? " [resumed]" : "") << '\n'
                          << std::flush;
            });
            const auto violations = bench::acceptance_violations(report);
            for (const auto& v : violations) {
                std::cout << "BOUND MISSED: " << v << '\n';
            }
            return violations.empty() ? 0 : 2;
        }
        if (*guess) {
            const auto pool = rg_pool.open();
            Rng rng(rg_seed);
            const auto r = bench::monte_carlo_random_guess(rg_params.get(), *pool, rg_trials, rng, rg_per);
            const double tol = rg_params.get().tolerance;
            const double analytic = 3.14159265358979323846 * tol * tol / (300.0 * 300.0);
            std::cout << "trials=" << r.trials << " successes=" << r.successes << " challenges=" << r.challenges
                      << " rate=" << r.rate() << " analytic=" << analytic << '\n';
            return 0;
        }
        if (*profile) {
            const auto pool = pf_pool.open();
            Rng rng(pf_seed);
            const auto rows = bench::profile_generation(*pool, pf_params.get(), pf_n, rng);
            bench::write_profile_csv(rows, pf_out);
            const auto s = bench::summarize(rows);
            std::cout << "challenges=" << rows.size() << " mean_total_s=" << s.total_s.mean
                      << " p50=" << s.total_s.p50 << " p90=" << s.total_s.p90 << " p99=" << s.total_s.p99
                      << " max=" << s.total_s.max << '\n'
                      << "mean_stars=" << s.stars.mean << " mean_preprocess_s=" << s.mean_preprocess_s
                      << " mean_decompose_s=" << s.mean_decompose_s << " mean_trajectory_s=" << s.mean_trajectory_s
                      << " dominant=" << s.dominant_phase << '\n';
            return 0;
        }
        if (*golden) {
            const auto pool = gd_pool.open();
            std::ofstream file;
            *open_out(gd_out, file) << golden_vectors(*pool, gd) << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
