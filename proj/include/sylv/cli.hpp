#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sylv/error.hpp"
#include "sylv/pipeline.hpp"
#include "sylv/regularity.hpp"
#include "sylv/toric.hpp"

namespace sylv::cli {

enum ExitCode : int {
    ok = 0,
    usage = 1,
    feasibility = 2,
    verification = 3,
    parse = 4,
    domain = 5,
};

/// Text table with right-aligned columns, or CSV.
inline void print_table(std::ostream& out, const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows, bool csv)
{
    if (csv) {
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
            out << '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return;
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "  " : "") << std::setw(int(width[i])) << r[i];
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

namespace detail {

struct Common {
    unsigned threads = 0;
    bool quiet = false;
    bool csv = false;
};

inline PipelineArtifact read_artifact(const std::string& path) { return load(std::filesystem::path(path)); }

inline int triangulate(const Common& common, const std::string& family, std::size_t n, const std::string& out_path,
                       std::uint64_t max_cells, const std::string& cache, std::ostream& out, std::ostream& err)
{
    FamilySpec spec{parse_family(family), n};
    PipelineOptions opt;
    opt.threads = common.threads;
    opt.max_cells = max_cells;
    if (!cache.empty()) opt.cache_dir = cache;
    if (!common.quiet) opt.log = [&err](const std::string& s) { err << s << '\n'; };
    const auto t0 = std::chrono::steady_clock::now();
    Pipeline pipeline(opt);
    auto a = pipeline.get(spec);
    if (!out_path.empty()) save(a, std::filesystem::path(out_path));
    std::string mode = "unverified";
    if (!a.provenance.empty()) mode = a.provenance.back().value("regularity", mode);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << to_string(spec.family) << " n=" << spec.n << ": " << a.triangulation.cells().size() << " cells, "
        << a.triangulation.store().size() << " points, regular (" << mode << "), unimodular";
    if (!common.quiet) out << ", " << std::fixed << std::setprecision(2) << secs << " s";
    out << '\n';
    return ok;
}

inline int verify_file(const Common& common, const std::string& path, const std::string& mode, std::ostream& out)
{
    auto a = read_artifact(path);
    VerifyOptions vo;
    vo.threads = common.threads;
    auto structure = verify(a.triangulation, vo);
    RegularityOptions ro;
    ro.threads = common.threads;
    const std::uint64_t pairs = std::uint64_t(a.triangulation.cells().size()) * a.triangulation.store().size();
    if (mode == "full") ro.mode = RegularityMode::full;
    else if (mode == "local") ro.mode = RegularityMode::local;
    else ro.mode = pairs <= full_check_pair_limit ? RegularityMode::full : RegularityMode::local;
    auto regularity = verify_regularity(a.triangulation, a.witness, ro);
    const bool volume = BigInt(a.triangulation.cells().size()) == structure.ambient_volume &&
                        structure.volume_checksum == structure.ambient_volume;
    auto yes = [](bool b) { return b ? "yes" : "no"; };
    out << "artifact: " << to_string(a.spec.family) << " n=" << a.spec.n << ", " << a.triangulation.cells().size()
        << " cells, " << a.triangulation.store().size() << " points\n";
    out << "valid: " << yes(structure.valid) << '\n';
    out << "simplicial: " << yes(structure.simplicial) << '\n';
    out << "unimodular: " << yes(structure.unimodular) << '\n';
    out << "regular: " << yes(regularity.regular) << " (" << regularity.mode << ", " << regularity.checked_pairs
        << " pairs checked)\n";
    out << "volume checksum: " << structure.volume_checksum << " of " << structure.ambient_volume << '\n';
    for (const auto& r : structure.reasons) out << "  " << r << '\n';
    for (const auto& v : regularity.violations)
        out << "  violation: cell " << v.cell << ", point " << to_string(a.triangulation.store()[v.point]) << ", margin "
            << to_string(v.margin) << '\n';
    const bool pass = structure.valid && structure.simplicial && structure.unimodular && regularity.regular && volume;
    out << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? ok : verification;
}

inline int fan(const Common& common, const std::string& path, const std::string& out_path, std::ostream& out)
{
    auto a = read_artifact(path);
    auto f = fan_from_triangulation(a.triangulation, common.threads);
    if (!out_path.empty()) {
        std::ofstream os(out_path);
        if (!os) throw ParseError("cannot write " + out_path);
        os << to_json(f).dump(1) << '\n';
    }
    auto flag = [](bool b, const char* name) { return std::string(b ? "" : "not-") + name; };
    out << flag(f.flags.complete, "complete") << ' ' << flag(f.flags.smooth, "smooth") << ' '
        << flag(f.flags.crepant, "crepant") << ", " << f.cones.size() << " cones, " << f.rays.size() << " rays\n";
    for (const auto& p : f.problems) out << "  " << p << '\n';
    const bool pass = f.flags.complete && f.flags.smooth && f.flags.crepant && f.flags.primitive;
    return pass ? ok : verification;
}

inline int invariants(const Common& common, std::size_t n_max, std::optional<std::size_t> hodge, int family,
                      std::ostream& out)
{
    if (hodge) {
        auto d = hodge_diamond(*hodge, family);
        out << (common.csv ? d.to_csv() : d.to_text());
        return ok;
    }
    if (n_max < 1) throw DomainError("--n-max must be at least 1");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t n = 1; n <= n_max; ++n) {
        auto r1 = betti_euler(n, 1);
        auto r2 = betti_euler(n, 2);
        rows.push_back({std::to_string(n), r1.index.str(), r1.betti_sum.str(), r1.euler.str(), r2.euler.str()});
    }
    print_table(out, {"n", "index", "betti_sum", "euler_1", "euler_2"}, rows, common.csv);
    return ok;
}

inline int stats(const Common& common, const std::string& path, std::ostream& out)
{
    auto a = read_artifact(path);
    const auto& t = a.triangulation;
    std::vector<char> used(t.store().size(), 0);
    for (std::size_t c = 0; c < t.cells().size(); ++c)
        for (auto id : t.cells()[c]) used[id] = 1;
    std::size_t used_points = 0;
    for (auto u : used) used_points += u;
    std::vector<std::vector<std::string>> rows{
        {"family", to_string(a.spec.family)},
        {"n", std::to_string(a.spec.n)},
        {"cells", std::to_string(t.cells().size())},
        {"points", std::to_string(t.store().size())},
        {"points used", std::to_string(used_points)},
        {"expected cells", expected_cells(a.spec).str()},
    };
    // pull exponents recorded at each level
    std::size_t level = 0;
    for (const auto& step : a.provenance) {
        if (step.value("step", "") == "column-pullback") level = step.value("n", std::size_t(0));
        if (step.value("step", "") != "pull-all" || !step.contains("exponents")) continue;
        const auto& ks = step["exponents"];
        unsigned long long sum = 0, top = 0;
        for (const auto& k : ks) {
            sum += k.get<unsigned long long>();
            top = std::max(top, k.get<unsigned long long>());
        }
        std::ostringstream mean;
        mean << std::fixed << std::setprecision(2) << (ks.empty() ? 0.0 : double(sum) / double(ks.size()));
        rows.push_back({"pulls at level " + std::to_string(level), std::to_string(ks.size())});
        rows.push_back({"max exponent", std::to_string(top)});
        rows.push_back({"mean exponent", mean.str()});
    }
    print_table(out, {"statistic", "value"}, rows, common.csv);
    return ok;
}

} // namespace detail

/// Runs one command; returns the process exit code. Output goes to `out`,
/// diagnostics and progress to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Regular unimodular triangulations of Sylvester weighted simplices"};
    app.require_subcommand(1);
    detail::Common common;
    app.add_option("--threads", common.threads, "worker threads (0 = all cores)");
    app.add_flag("--quiet", common.quiet, "no progress messages or timings");

    std::string family = "p2dual", out_path, cache = "artifacts", mode = "auto";
    std::size_t n = 1;
    std::uint64_t max_cells = default_max_cells;
    auto* tri = app.add_subcommand("triangulate", "build and certify a family triangulation");
    tri->add_option("--family", family, "p1, p2 or p2dual")->check(CLI::IsMember({"p1", "p2", "p2dual"}));
    tri->add_option("--n", n, "family index")->required();
    tri->add_option("--out", out_path, "artifact JSON to write");
    tri->add_option("--max-cells", max_cells, "refuse runs needing more cells")->capture_default_str();
    tri->add_option("--cache", cache, "artifact cache directory (empty disables)")->capture_default_str();

    std::string path;
    auto* ver = app.add_subcommand("verify", "check an artifact: structure, regularity, volume");
    ver->add_option("path", path, "artifact JSON")->required();
    ver->add_option("--mode", mode, "full, local or auto")->check(CLI::IsMember({"full", "local", "auto"}));

    auto* fan = app.add_subcommand("fan", "export the fan over the boundary cells");
    fan->add_option("path", path, "artifact JSON")->required();
    fan->add_option("--out", out_path, "fan JSON to write");

    std::size_t n_max = 6;
    std::optional<std::size_t> hodge;
    int hodge_family = 1;
    auto* inv = app.add_subcommand("invariants", "index, Betti and Euler tables, Hodge diamonds");
    inv->add_option("--n-max", n_max, "last row of the table")->capture_default_str();
    inv->add_option("--hodge", hodge, "print the Hodge diamond for this n (3 or 4)");
    inv->add_option("--family", hodge_family, "hypersurface family for --hodge (1 or 2)")->capture_default_str();
    inv->add_flag("--csv", common.csv, "CSV instead of aligned text");

    auto* st = app.add_subcommand("stats", "summary numbers of an artifact");
    st->add_option("path", path, "artifact JSON")->required();
    st->add_flag("--csv", common.csv, "CSV instead of aligned text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream msg, help;
        int code = app.exit(e, help, msg);
        out << help.str();
        err << msg.str();
        return code == 0 ? ok : usage;
    }

    try {
        if (*tri) return detail::triangulate(common, family, n, out_path, max_cells, cache, out, err);
        if (*ver) return detail::verify_file(common, path, mode, out);
        if (*fan) return detail::fan(common, path, out_path, out);
        if (*inv) return detail::invariants(common, n_max, hodge, hodge_family, out);
        if (*st) return detail::stats(common, path, out);
    } catch (const FeasibilityError& e) {
        err << "refused: " << e.what() << '\n';
        return feasibility;
    } catch (const VerificationError& e) {
        err << "verification failed: " << e.what() << '\n';
        return verification;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return parse;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return domain;
    } catch (const DimensionError& e) {
        err << "domain error: " << e.what() << '\n';
        return domain;
    }
    return usage;
}

} // namespace sylv::cli
