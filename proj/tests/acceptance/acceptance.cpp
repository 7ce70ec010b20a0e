// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cli.hpp"
#include "tilepanel/tilepanel.hpp"

using namespace tilepanel;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("tilepanel_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int cli(std::vector<std::string> args, std::string* err = nullptr) {
    std::ostringstream out, e;
    const int code = cli::run_cli(args, out, e);
    if (err) *err = e.str();
    return code;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

CompatibilityMatrix random_matrix(int n, Variant v, std::uint64_t seed, Semantics s) {
    CompatibilityMatrix m(n, v, s);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    m.for_each_admissible([&](int i, int j) { m.set(i, j, u(rng)); });
    return m;
}

std::vector<PuzzleBundle> photo_bundles() {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(fs::path(TILEPANEL_TEST_DATA) / "photos"))
        if (e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<PuzzleBundle> out;
    for (const auto& f : files) {
        auto b = cut_image(read_png(f), 9, 12, 50);
        b.provenance = f.filename().string();
        out.push_back(std::move(b));
    }
    return out;
}

// --------------------------------------------------------------------------

Verdict oracle_reconstruction() {
    const fs::path d = work_dir() / "oracle16";
    std::string err;
    if (cli({"generate", "--rows", "16", "--cols", "16", "--style", "gradient", "--seed", "16", "-o", (d / "g").string()}, &err) ||
        cli({"scramble", (d / "g").string(), "--type", "2", "--seed", "17", "-o", (d / "b").string()}, &err) ||
        cli({"score", (d / "b").string(), "--measure", "oracle", "--type", "2", "-o", (d / "m.cmat").string()}, &err) ||
        cli({"solve", (d / "b").string(), "--cmat", (d / "m.cmat").string(), "--type", "2", "--dims", "unknown", "--seed",
             "1", "-o", (d / "sol.json").string()},
            &err) ||
        cli({"eval", (d / "sol.json").string(), (d / "b").string(), "-o", (d / "report.csv").string()}, &err))
        return {false, "pipeline failed: " + err};
    const auto sol = cli::read_solution(d / "sol.json");
    const auto b = read_bundle(d / "b");
    const auto r = neighbor_accuracy(sol.placements, b, Variant::Type2, false);
    return {r.neighbor_accuracy == 1.0, "256 tiles, best-run neighbor accuracy " + fmt("%.4f", r.neighbor_accuracy)};
}

Verdict rank_exactness(const std::vector<PuzzleBundle>& photos) {
    std::vector<PuzzleBundle> bundles;
    for (int k = 0; k < 6; ++k) {
        const auto base = synthetic_bundle(k % 2 ? SyntheticStyle::Noise : SyntheticStyle::Gradient, 2 + k, 3 + k, k, 16);
        bundles.push_back(scramble(base, Variant::Type1, k));
        bundles.push_back(scramble(base, Variant::Type2, k));
    }
    for (const auto& p : photos) bundles.push_back(scramble(p, Variant::Type2, 3));
    std::size_t checked = 0;
    for (const auto& b : bundles)
        for (auto v : {Variant::Type1, Variant::Type2}) {
            const bool rotated = std::any_of(b.ground_truth->begin(), b.ground_truth->end(),
                                             [](const Placement& p) { return p.rot.quarter_turns() != 0; });
            if (v == Variant::Type1 && rotated) continue;
            const auto h = rank_histogram(oracle_matrix(b, v), b);
            if (h.counts.empty() || h.counts[0] != h.total) return {false, "rank1 below 100% on " + b.provenance};
            ++checked;
        }
    return {true, std::to_string(checked) + " bundle/variant cases, rank1 = 100%, all other ranks 0%"};
}

Verdict normalization_invariance() {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Variant v = s % 2 ? Variant::Type2 : Variant::Type1;
        const auto b = scramble(synthetic_bundle(SyntheticStyle::Noise, 3 + s % 3, 4, s, 8), v, s);
        const auto raw = random_matrix(b.size(), v, 1000 + s, Semantics::Dissimilarity);
        if (!(rank_histogram(raw, b) == rank_histogram(normalize_minmax(to_similarity(raw)), b)))
            return {false, "histograms differ for matrix " + std::to_string(s)};
    }
    return {true, "20 matrices, histograms identical"};
}

Verdict symmetrize_exactness() {
    double worst = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Variant v = s % 2 ? Variant::Type2 : Variant::Type1;
        const auto m = symmetrize(normalize_minmax(random_matrix(3 + static_cast<int>(s % 7), v, 2000 + s, Semantics::Similarity)));
        m.for_each_admissible([&](int i, int j) { worst = std::max(worst, std::abs(double(m(i, j)) - double(m(j, i)))); });
    }
    return {worst == 0.0, "20 matrices, max |C(i,j) - C(j,i)| = " + fmt("%g", worst)};
}

Verdict measure_ordering(const std::vector<PuzzleBundle>& photos) {
    int wins = 0;
    std::string detail;
    for (const auto& p : photos) {
        const auto mgc = rank_histogram(build_matrix(p, MeasureKind::MGC, Variant::Type1), p).percent(1);
        const auto ssd = rank_histogram(build_matrix(p, MeasureKind::SSD, Variant::Type1), p).percent(1);
        wins += mgc >= ssd;
        detail += " " + p.provenance + " " + fmt("%.1f", mgc) + "/" + fmt("%.1f", ssd);
    }
    return {photos.size() == 5 && wins >= 4,
            std::to_string(wins) + " of " + std::to_string(photos.size()) + " with MGC >= SSD (mgc/ssd rank1 %):" + detail};
}

Verdict ga_monotone_and_valid() {
    struct Case {
        Variant v;
        int rows, cols;
        bool known;
    };
    std::size_t checked = 0;
    std::string failure;
    for (const Case& c : {Case{Variant::Type1, 8, 8, true}, Case{Variant::Type2, 6, 7, false}, Case{Variant::Type2, 6, 6, true}}) {
        const auto b = scramble(synthetic_bundle(SyntheticStyle::Gradient, c.rows, c.cols, 5, 50), c.v, 6);
        const auto m = symmetrize(normalize_minmax(to_similarity(build_matrix(b, MeasureKind::MGC, c.v))));
        const auto frame = frame_for(b, c.v, c.known);
        GaConfig cfg;
        cfg.generations = 150;
        cfg.seed = 9;
        std::mutex mu;
        std::vector<double> last(static_cast<std::size_t>(cfg.runs), -1.0);
        solve(m, frame, cfg, [&](int run, int, std::span<const Chromosome> pop) {
            double best = -1;
            for (const Chromosome& ch : pop) {
                if (auto e = validity_error(ch, frame)) {
                    std::lock_guard lock(mu);
                    failure = *e;
                }
                best = std::max(best, ch.fitness());
            }
            std::lock_guard lock(mu);
            if (best < last[static_cast<std::size_t>(run)]) failure = "best fitness decreased";
            last[static_cast<std::size_t>(run)] = best;
            checked += pop.size();
        });
        if (!failure.empty()) return {false, failure};
    }
    return {true, std::to_string(checked) + " chromosomes valid over 3 puzzles x 10 runs x 151 generations, best fitness never fell"};
}

Verdict noisy_robustness() {
    const Variant v = Variant::Type1;
    const auto b = scramble(synthetic_bundle(SyntheticStyle::Noise, 10, 10, 70, 8), v, 71);
    const auto oracle = oracle_matrix(b, v);
    std::vector<int> partner(static_cast<std::size_t>(oracle.n_edges()), -1);
    for (const Abutment& a : ground_truth_abutments(b, v)) {
        partner[static_cast<std::size_t>(a.first.index())] = a.second.index();
        partner[static_cast<std::size_t>(a.second.index())] = a.first.index();
    }
    std::mt19937_64 rng(72);
    std::uniform_real_distribution<float> low(0.0f, 0.9f), high(1.0f, 1.1f);
    std::bernoulli_distribution corrupt(0.3);
    CompatibilityMatrix m(b.size(), v, Semantics::Similarity);
    for (int i = 0; i < m.n_edges(); ++i) {
        std::vector<int> cands;
        for (int j = 0; j < m.n_edges(); ++j)
            if (m.admissible(i, j)) {
                m.set(i, j, low(rng));
                cands.push_back(j);
            }
        const int t = partner[static_cast<std::size_t>(i)];
        if (t < 0) continue;
        m.set(i, t, 1.0f);
        if (corrupt(rng)) {
            int decoy;
            do decoy = cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)];
            while (decoy == t);
            m.set(i, decoy, std::nextafter(1.0f, 2.0f) + 0.1f * std::generate_canonical<float, 24>(rng));
        }
    }
    m = normalize_minmax(m);
    const double rank1 = rank_histogram(m, b).fraction(1);
    GaConfig cfg;
    cfg.seed = 73;
    const auto r = solve(m, frame_for(b, v, true), cfg);
    const double acc = neighbor_accuracy(r.best().best.placements(), b, v, true).neighbor_accuracy;
    return {acc >= 0.80 && rank1 > 0.65 && rank1 < 0.75,
            "rank1 of corrupted matrix " + fmt("%.3f", rank1) + ", best-of-10 neighbor accuracy " + fmt("%.3f", acc)};
}

Verdict cmat_round_trip() {
    const fs::path f = work_dir() / "rt.cmat";
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto m = random_matrix(1 + static_cast<int>(s % 9), s % 2 ? Variant::Type2 : Variant::Type1, 3000 + s,
                               s % 3 ? Semantics::Similarity : Semantics::Dissimilarity);
        m.set_normalized(s % 4 == 1);
        m.set_symmetric(s % 5 == 2);
        save_matrix(m, f);
        if (!bitwise_equal(load_matrix(f), m)) return {false, "matrix " + std::to_string(s) + " changed on reload"};
    }
    const auto good = encode_matrix(random_matrix(3, Variant::Type2, 1, Semantics::Similarity));
    auto code_of = [](std::vector<char> bytes) -> std::optional<ParseErrc> {
        try {
            decode_matrix(bytes);
        } catch (const ParseError& e) {
            return e.code();
        }
        return std::nullopt;
    };
    auto magic = good, version = good, truncated = good, nonfinite = good;
    magic[1] = 'X';
    version[4] = 9;
    truncated.resize(truncated.size() - 7);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(nonfinite.data() + 12 + 4 * (1 * 12 + 4), &nan, 4);
    const bool errors = code_of(magic) == ParseErrc::bad_magic && code_of(version) == ParseErrc::version_mismatch &&
                        code_of(truncated) == ParseErrc::truncated && code_of(nonfinite) == ParseErrc::non_finite;
    return {errors, "100 matrices bit-exact; bad magic, version mismatch, truncation (and non-finite) each reported"};
}

Verdict determinism() {
    const fs::path d = work_dir() / "determinism";
    std::string err;
    if (cli({"generate", "--rows", "6", "--cols", "6", "--seed", "3", "-o", (d / "g").string()}, &err) ||
        cli({"scramble", (d / "g").string(), "--type", "2", "--seed", "4", "-o", (d / "b").string()}, &err) ||
        cli({"score", (d / "b").string(), "--measure", "mgc", "--type", "2", "-o", (d / "m.cmat").string()}, &err))
        return {false, err};
    std::vector<std::string> base{"solve", (d / "b").string(), "--cmat", (d / "m.cmat").string(), "--type", "2",
                                  "--dims", "unknown", "--gens", "60", "--seed", "123"};
    auto first = base, second = base;
    first.insert(first.end(), {"--threads", "1", "-o", (d / "a.json").string()});
    second.insert(second.end(), {"--threads", "4", "-o", (d / "b.json").string()});
    if (cli(first, &err) || cli(second, &err)) return {false, err};
    const bool same = read_text(d / "a.json") == read_text(d / "b.json");
    return {same, same ? "two solves with seed 123 wrote identical bytes" : "outputs differ"};
}

} // namespace

int main() {
    const std::vector<PuzzleBundle> photos = photo_bundles();
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"oracle reconstruction 16x16 type 2", oracle_reconstruction},
        {"rank metric exactness", [&] { return rank_exactness(photos); }},
        {"normalization invariance", normalization_invariance},
        {"symmetrize exactness", symmetrize_exactness},
        {"measure ordering mgc vs ssd", [&] { return measure_ordering(photos); }},
        {"ga monotonicity and validity", ga_monotone_and_valid},
        {"noisy measure robustness", noisy_robustness},
        {"cmat round trip", cmat_round_trip},
        {"solve determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !v.pass;
    }
    fs::remove_all(work_dir());
    return failed == 0 ? 0 : 1;
}
