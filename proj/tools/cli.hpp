#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tilepanel/tilepanel.hpp"

namespace tilepanel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Flags that parse but contradict each other or the inputs.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Solution {
    Variant variant = Variant::Type1;
    bool dims_known = false;
    std::vector<Placement> placements;
    double fitness = 0.0;
    std::uint64_t seed = 0;
    int generations = 0;
};

inline nlohmann::json solution_to_json(const Solution& s) {
    nlohmann::json j;
    j["variant"] = to_int(s.variant);
    j["dims_known"] = s.dims_known;
    j["placements"] = nlohmann::json::array();
    for (const Placement& p : s.placements) j["placements"].push_back(placement_to_json(p));
    j["fitness"] = s.fitness;
    j["seed"] = s.seed;
    j["generations"] = s.generations;
    return j;
}

inline Solution read_solution(const std::filesystem::path& path) {
    try {
        const auto j = nlohmann::json::parse(read_text(path));
        Solution s;
        s.variant = variant_from_int(j.at("variant").get<int>());
        s.dims_known = j.at("dims_known").get<bool>();
        for (const auto& p : j.at("placements")) s.placements.push_back(placement_from_json(p));
        s.fitness = j.at("fitness").get<double>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.generations = j.at("generations").get<int>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": malformed solution: " + e.what());
    }
}

/// Brings any stored matrix into the form the solver consumes.
inline CompatibilityMatrix prepare_for_solver(CompatibilityMatrix m, bool symmetrize_scores) {
    if (m.semantics() == Semantics::Dissimilarity) m = to_similarity(m);
    if (!m.normalized()) m = normalize_minmax(m);
    if (symmetrize_scores && !m.symmetric()) m = symmetrize(m);
    check_invariants(m);
    return m;
}

inline void check_matrix_fits(const CompatibilityMatrix& m, Variant variant, const PuzzleBundle& bundle) {
    if (m.variant() != variant)
        throw UsageError("variant mismatch: matrix was scored for Type" + std::to_string(to_int(m.variant())) +
                         " but --type " + std::to_string(to_int(variant)) + " was given");
    if (m.n_tiles() != bundle.size())
        throw UsageError("matrix covers " + std::to_string(m.n_tiles()) + " tiles but the bundle has " +
                         std::to_string(bundle.size()));
}

inline std::string generation_csv(const std::vector<GenerationStats>& log) {
    std::ostringstream out;
    out << "generation,best_fitness,mean_fitness";
    for (int p = 1; p <= kPhaseCount; ++p) out << ",phase" << p << "_placements";
    out << '\n' << std::setprecision(10);
    for (const GenerationStats& g : log) {
        out << g.generation << ',' << g.best_fitness << ',' << g.mean_fitness;
        for (const auto c : g.phase_placements) out << ',' << c;
        out << '\n';
    }
    return out.str();
}

/// Solution on the left, ground truth (when known) on the right.
inline Image render_side_by_side(const PuzzleBundle& bundle, const std::vector<Placement>& solution) {
    const Image solved = assemble(bundle, solution);
    if (!bundle.ground_truth) return solved;
    const Image truth = assemble(bundle, *bundle.ground_truth);
    const int gap = std::max(2, bundle.tile_px() / 5);
    Image out(std::max(solved.height(), truth.height()), solved.width() + gap + truth.width());
    for (auto& v : out.data()) v = 255;
    blit(out, solved, 0, 0);
    blit(out, truth, 0, solved.width() + gap);
    return out;
}

namespace detail {

inline std::filesystem::path sidecar_for(const std::filesystem::path& out, bool is_dir) {
    return is_dir ? out / "run.json" : std::filesystem::path(out.string() + ".run.json");
}

inline void write_sidecar(const std::filesystem::path& out, bool is_dir, const std::string& command,
                          const std::vector<std::string>& args, const nlohmann::json& resolved) {
    nlohmann::json j;
    j["command"] = command;
    j["argv"] = args;
    j["resolved"] = resolved;
    write_text_atomic(sidecar_for(out, is_dir), j.dump(2) + "\n");
}

inline std::string fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

} // namespace detail

/// Runs one command line (args excludes the program name). Returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Square-tile jigsaw solver: cut, score, solve and evaluate tile puzzles"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    std::filesystem::path output, input, input2, cmat_path;
    int rows = 0, cols = 0, tile_px = kCanonicalTilePx, type = 1, threads = 0;
    std::uint64_t seed = 0;

    auto* cut = app.add_subcommand("cut", "Cut an image into a bundle of square tiles");
    cut->add_option("image", input, "Source PNG")->required()->check(CLI::ExistingFile);
    cut->add_option("--rows", rows)->required()->check(CLI::PositiveNumber);
    cut->add_option("--cols", cols)->required()->check(CLI::PositiveNumber);
    cut->add_option("--tile-px", tile_px, "Output tile side")->check(CLI::PositiveNumber)->capture_default_str();
    cut->add_option("-o,--output", output, "Bundle directory")->required();

    std::vector<std::string> style{"noise"};
    auto* gen = app.add_subcommand("generate", "Make a synthetic or photo bundle with ground truth");
    gen->add_option("--rows", rows)->required()->check(CLI::PositiveNumber);
    gen->add_option("--cols", cols)->required()->check(CLI::PositiveNumber);
    gen->add_option("--style", style, "noise | gradient | photo <path>")->expected(1, 2)->capture_default_str();
    gen->add_option("--seed", seed)->capture_default_str();
    gen->add_option("--tile-px", tile_px)->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("-o,--output", output)->required();

    auto* scr = app.add_subcommand("scramble", "Shuffle (and for type 2, turn) the tiles of a bundle");
    scr->add_option("bundle", input)->required()->check(CLI::ExistingDirectory);
    scr->add_option("--type", type)->required()->check(CLI::IsMember({1, 2}));
    scr->add_option("--seed", seed)->capture_default_str();
    scr->add_option("-o,--output", output)->required();

    std::string measure = "mgc";
    bool raw = false, normalized_only = false, symmetric = false;
    auto* score = app.add_subcommand("score", "Compute a compatibility matrix file");
    score->add_option("bundle", input)->required()->check(CLI::ExistingDirectory);
    score->add_option("--measure", measure)->check(CLI::IsMember({"ssd", "mgc", "oracle"}))->capture_default_str();
    score->add_option("--type", type)->required()->check(CLI::IsMember({1, 2}));
    auto* f_raw = score->add_flag("--raw", raw, "Store measure output untouched");
    auto* f_norm = score->add_flag("--normalized", normalized_only, "Similarity, min-max scaled per edge");
    auto* f_sym = score->add_flag("--symmetric", symmetric, "Normalized, then symmetrized (default)");
    f_raw->excludes(f_norm)->excludes(f_sym);
    f_norm->excludes(f_sym);
    score->add_option("--threads", threads)->check(CLI::NonNegativeNumber);
    score->add_option("-o,--output", output)->required();

    GaConfig cfg;
    std::string dims = "known";
    bool symmetrize_scores = false;
    std::filesystem::path log_path;
    auto* solve_cmd = app.add_subcommand("solve", "Run the genetic solver on a bundle and matrix");
    solve_cmd->add_option("bundle", input)->required()->check(CLI::ExistingDirectory);
    solve_cmd->add_option("--cmat", cmat_path)->required();
    solve_cmd->add_option("--type", type)->required()->check(CLI::IsMember({1, 2}));
    solve_cmd->add_option("--dims", dims)->check(CLI::IsMember({"known", "unknown"}))->capture_default_str();
    solve_cmd->add_option("--runs", cfg.runs)->check(CLI::PositiveNumber)->capture_default_str();
    solve_cmd->add_option("--pop", cfg.population_size)->capture_default_str();
    solve_cmd->add_option("--gens", cfg.generations)->capture_default_str();
    std::vector<double> skips;
    solve_cmd->add_option("--skip", skips, "Phase I, II, III skip probabilities")->expected(3);
    solve_cmd->add_option("--floor", cfg.score_threshold_floor, "Phase I/II score floor")->capture_default_str();
    solve_cmd->add_option("--elite", cfg.elite_count)->capture_default_str();
    solve_cmd->add_flag("--skip-per-step", cfg.skip_per_step, "Resample phase skips before every placement");
    solve_cmd->add_option("--seed", cfg.seed)->capture_default_str();
    solve_cmd->add_option("--threads", cfg.threads)->check(CLI::NonNegativeNumber);
    solve_cmd->add_flag("--symmetrize", symmetrize_scores, "Symmetrize the matrix before solving");
    solve_cmd->add_option("--log", log_path, "Per-generation CSV of the winning run");
    solve_cmd->add_option("-o,--output", output)->required();

    auto* eval = app.add_subcommand("eval", "Neighbor accuracy of a solution against ground truth");
    eval->add_option("solution", input)->required()->check(CLI::ExistingFile);
    eval->add_option("bundle", input2)->required()->check(CLI::ExistingDirectory);
    eval->add_option("--cmat", cmat_path, "Also report ground-truth fitness under this matrix");
    eval->add_flag("--symmetrize", symmetrize_scores);
    eval->add_option("-o,--output", output)->required();

    auto* rank = app.add_subcommand("rank", "rank_k histogram of a matrix against ground truth");
    rank->add_option("cmat", cmat_path)->required();
    rank->add_option("bundle", input2)->required()->check(CLI::ExistingDirectory);
    rank->add_option("-o,--output", output)->required();

    auto* render = app.add_subcommand("render", "Draw a solution beside the ground truth");
    render->add_option("solution", input)->required()->check(CLI::ExistingFile);
    render->add_option("bundle", input2)->required()->check(CLI::ExistingDirectory);
    render->add_option("-o,--output", output)->required();

    std::vector<std::string> argv_store{"tilepanel"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (cut->parsed()) {
            PuzzleBundle b = cut_image(read_png(input), rows, cols, tile_px);
            b.provenance = "cut " + input.filename().string();
            write_bundle(output, b);
            detail::write_sidecar(output, true, "cut", args, {{"rows", rows}, {"cols", cols}, {"tile_px", tile_px}});
            out << "wrote " << b.size() << " tiles to " << output.string() << "\n";
        } else if (gen->parsed()) {
            PuzzleBundle b;
            if (style[0] == "photo") {
                if (style.size() != 2) throw UsageError("--style photo needs an image path");
                b = cut_image(read_png(style[1]), rows, cols, tile_px);
                b.provenance = "photo " + std::filesystem::path(style[1]).filename().string();
            } else if (style.size() == 1 && (style[0] == "noise" || style[0] == "gradient")) {
                b = synthetic_bundle(style[0] == "noise" ? SyntheticStyle::Noise : SyntheticStyle::Gradient, rows, cols,
                                     seed, tile_px);
            } else {
                throw UsageError("--style must be noise, gradient or photo <path>");
            }
            write_bundle(output, b);
            detail::write_sidecar(output, true, "generate", args,
                                  {{"rows", rows}, {"cols", cols}, {"style", style}, {"seed", seed}, {"tile_px", tile_px}});
            out << "wrote " << b.size() << " tiles to " << output.string() << "\n";
        } else if (scr->parsed()) {
            const PuzzleBundle src = read_bundle(input);
            PuzzleBundle b = scramble(src, variant_from_int(type), seed);
            b.provenance = src.provenance + "; scrambled type=" + std::to_string(type) + " seed=" + std::to_string(seed);
            write_bundle(output, b);
            detail::write_sidecar(output, true, "scramble", args, {{"type", type}, {"seed", seed}});
            out << "scrambled " << b.size() << " tiles into " << output.string() << "\n";
        } else if (score->parsed()) {
            const PuzzleBundle b = read_bundle(input);
            const Variant v = variant_from_int(type);
            CompatibilityMatrix m;
            if (measure == "oracle") {
                m = oracle_matrix(b, v);
            } else {
                m = build_matrix(b, measure == "ssd" ? MeasureKind::SSD : MeasureKind::MGC, v, threads);
                if (!raw) m = normalize_minmax(to_similarity(m));
                if (!raw && !normalized_only) m = symmetrize(m);
            }
            save_matrix(m, output);
            const std::string mode = raw ? "raw" : normalized_only ? "normalized" : "symmetric";
            detail::write_sidecar(output, false, "score", args, {{"measure", measure}, {"type", type}, {"mode", mode}});
            out << "scored " << m.admissible_count() << " edge pairs (" << measure << ", " << mode << ") into "
                << output.string() << "\n";
        } else if (solve_cmd->parsed()) {
            const PuzzleBundle b = read_bundle(input);
            const Variant v = variant_from_int(type);
            const CompatibilityMatrix stored = load_matrix(cmat_path);
            check_matrix_fits(stored, v, b);
            const CompatibilityMatrix m = prepare_for_solver(stored, symmetrize_scores);
            if (!skips.empty()) {
                cfg.skip_p1 = skips[0];
                cfg.skip_p2 = skips[1];
                cfg.skip_p3 = skips[2];
            }
            try {
                cfg.validate();
            } catch (const InputError& e) {
                throw UsageError(e.what());
            }
            const bool known = dims == "known";
            const SolverFrame frame = frame_for(b, v, known);
            const SolveResult result = solve(m, frame, cfg);
            const RunResult& best = result.best();

            Solution s{v, known, best.best.placements(), best.best.fitness(), cfg.seed, cfg.generations};
            write_text_atomic(output, solution_to_json(s).dump(2) + "\n");
            if (!log_path.empty()) write_text_atomic(log_path, generation_csv(best.log));
            detail::write_sidecar(output, false, "solve", args,
                                  {{"type", type}, {"dims", dims}, {"runs", cfg.runs}, {"pop", cfg.population_size},
                                   {"gens", cfg.generations}, {"skip", {cfg.skip_p1, cfg.skip_p2, cfg.skip_p3}},
                                   {"floor", cfg.score_threshold_floor}, {"elite", cfg.elite_count},
                                   {"skip_per_step", cfg.skip_per_step}, {"seed", cfg.seed},
                                   {"symmetrize", symmetrize_scores}, {"best_run", result.best_run}});
            out << "best fitness " << detail::fixed(s.fitness, 4) << " (run " << result.best_run << " of " << cfg.runs
                << ")\n";
        } else if (eval->parsed()) {
            const Solution s = read_solution(input);
            const PuzzleBundle b = read_bundle(input2);
            if (!b.ground_truth) throw InputError("bundle has no ground truth to evaluate against");
            const AccuracyReport r = neighbor_accuracy(s.placements, b, s.variant, s.dims_known);
            std::ostringstream csv;
            csv << "neighbor_accuracy,perfect,correct,total,variant,dims_known,fitness";
            std::string extra;
            if (!cmat_path.empty()) {
                const CompatibilityMatrix stored = load_matrix(cmat_path);
                check_matrix_fits(stored, s.variant, b);
                const CompatibilityMatrix m = prepare_for_solver(stored, symmetrize_scores);
                csv << ",solution_fitness,ground_truth_fitness";
                extra = "," + detail::fixed(fitness(s.placements, m), 6) + "," +
                        detail::fixed(fitness(*b.ground_truth, m), 6);
            }
            csv << "\n"
                << detail::fixed(r.neighbor_accuracy, 6) << ',' << (r.perfect ? "true" : "false") << ',' << r.correct
                << ',' << r.total << ',' << to_int(r.variant) << ',' << (r.dims_known ? "true" : "false") << ','
                << detail::fixed(s.fitness, 6) << extra << "\n";
            write_text_atomic(output, csv.str());
            detail::write_sidecar(output, false, "eval", args, nlohmann::json::object());
            out << "neighbor accuracy " << detail::fixed(r.neighbor_accuracy, 4) << " (" << r.correct << "/" << r.total
                << ")\n";
        } else if (rank->parsed()) {
            const CompatibilityMatrix m = load_matrix(cmat_path);
            const PuzzleBundle b = read_bundle(input2);
            if (m.n_tiles() != b.size())
                throw UsageError("matrix covers " + std::to_string(m.n_tiles()) + " tiles but the bundle has " +
                                 std::to_string(b.size()));
            const RankHistogram h = rank_histogram(m, b);
            write_text_atomic(output, histogram_csv(h));
            auto json_path = output;
            json_path.replace_extension(".json");
            auto j = histogram_json(h);
            if (const auto bb = best_buddy_precision(m, b)) j["best_buddy_precision"] = *bb;
            write_text_atomic(json_path, j.dump(2) + "\n");
            detail::write_sidecar(output, false, "rank", args, nlohmann::json::object());
            out << "rank1 " << detail::fixed(h.percent(1), 1) << "% over " << h.total << " relations\n";
        } else if (render->parsed()) {
            const Solution s = read_solution(input);
            const PuzzleBundle b = read_bundle(input2);
            write_png(output, render_side_by_side(b, s.placements));
            detail::write_sidecar(output, false, "render", args, nlohmann::json::object());
            out << "wrote " << output.string() << "\n";
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitOk;
}

} // namespace tilepanel::cli
