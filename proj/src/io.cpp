#include "parobs/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace parobs::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_real(Real v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

FieldFiles write_grid_function(const fs::path& dir, const std::string& name,
                               const grid::GridFunction& u, int stride) {
    if (stride < 1) stride = 1;
    const grid::Grid& g = u.grid;
    const int nn = g.nodes();

    std::vector<int> levels;
    for (int m = 0; m < g.nt; m += stride) levels.push_back(m);
    if (levels.back() != g.nt - 1) levels.push_back(g.nt - 1);

    json header;
    header["dim"] = g.dim;
    header["extent"] = json::array();
    for (int d = 0; d < g.dim; ++d)
        header["extent"].push_back({g.lo[size_t(d)], g.hi[size_t(d)]});
    header["h"] = g.h;
    header["dt"] = g.dt;
    header["stored_dt"] = g.dt * stride;
    header["t_range"] = {g.t_begin, g.t_end};
    header["nx"] = g.dim == 2 ? json::array({g.nx[0], g.nx[1]}) : json::array({g.nx[0]});
    header["nt"] = g.nt;
    header["stored_levels"] = levels;
    header["layout"] = "node-major, time-outer";
    header["data"] = name + ".csv";

    std::ostringstream csv;
    for (const int m : levels) {
        const Real* row = u.level(m);
        for (int i = 0; i < nn; ++i) {
            if (i) csv << ',';
            csv << fmt_real(row[i]);
        }
        csv << '\n';
    }

    FieldFiles files{name + ".json", name + ".csv"};
    write_json(dir / files.header, header);
    write_text(dir / files.csv, csv.str());
    return files;
}

grid::GridFunction read_grid_function(const fs::path& header_path) {
    std::ifstream in(header_path);
    if (!in) throw Error("cannot read " + header_path.string());
    json header = json::parse(in);

    const int dim = header.at("dim").get<int>();
    std::array<Real, 2> lo{{-1, -1}}, hi{{1, 1}};
    for (int d = 0; d < dim; ++d) {
        lo[size_t(d)] = header.at("extent")[size_t(d)][0].get<Real>();
        hi[size_t(d)] = header.at("extent")[size_t(d)][1].get<Real>();
    }
    const auto levels = header.at("stored_levels").get<std::vector<int>>();
    const Real dt = header.at("dt").get<Real>();
    const Real t0 = header.at("t_range")[0].get<Real>();

    std::vector<Real> stored_times;
    for (const int m : levels) stored_times.push_back(t0 + dt * m);
    const Real sdt = stored_times.size() > 1 ? stored_times[1] - stored_times[0] : dt;
    for (size_t i = 1; i < stored_times.size(); ++i)
        if (std::abs(stored_times[i] - stored_times[i - 1] - sdt) > 1e-9 * std::max(1.0, sdt))
            throw Error("stored levels of " + header_path.string() + " are not uniformly strided");
    grid::Grid g = grid::Grid::make(dim, lo, hi, header.at("h").get<Real>(), stored_times.front(),
                                    stored_times.front() + sdt * Real(stored_times.size() - 1), sdt);

    grid::GridFunction u(g);
    std::ifstream data(header_path.parent_path() / header.at("data").get<std::string>());
    if (!data) throw Error("cannot read field data for " + header_path.string());
    std::string line;
    std::vector<Real> row(size_t(g.nodes()));
    for (int m = 0; m < g.nt; ++m) {
        if (!std::getline(data, line)) throw Error("field data truncated");
        std::stringstream ss(line);
        std::string cell;
        for (int i = 0; i < g.nodes(); ++i) {
            if (!std::getline(ss, cell, ',')) throw Error("field row truncated");
            row[size_t(i)] = std::strtod(cell.c_str(), nullptr);
        }
        u.set_level(m, row);
    }
    return u;
}

json report_to_json(const estimates::EstimateReport& rep) {
    json j;
    j["name"] = rep.name;
    j["columns"] = rep.columns;
    j["fitted"] = rep.fitted;
    j["params"] = rep.params;
    j["pass"] = rep.pass;
    j["notes"] = rep.notes;
    j["rows"] = rep.rows;
    return j;
}

std::vector<std::string> write_estimate_report(const fs::path& dir, const std::string& spec_name,
                                               const estimates::EstimateReport& rep) {
    const std::string base = spec_name + "_" + rep.name;
    write_json(dir / (base + ".json"), report_to_json(rep));

    std::ostringstream csv;
    for (size_t i = 0; i < rep.columns.size(); ++i) {
        if (i) csv << ',';
        csv << rep.columns[i];
    }
    csv << '\n';
    for (const auto& row : rep.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) csv << ',';
            csv << fmt_real(row[i]);
        }
        csv << '\n';
    }
    write_text(dir / (base + ".csv"), csv.str());
    return {base + ".json", base + ".csv"};
}

uint64_t fnv1a_hash(const std::string& data) {
    uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace parobs::io
