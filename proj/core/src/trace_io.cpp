#include "secest/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "secest/errors.hpp"

namespace secest::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trace_csv(const sim::SimulationTrace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::io_error, "cannot open " + path + " for writing");

    out << "k";
    for (int i = 0; i < trace.n; ++i) out << ",x_true_" << i;
    for (int i = 0; i < trace.n; ++i) out << ",x_hat_secure_" << i;
    for (int i = 0; i < trace.n; ++i) out << ",x_hat_luen_" << i;
    out << ",err_inf_secure,err_inf_luen";
    for (int i = 0; i < trace.m; ++i) out << ",residue_" << i;
    for (int i = 0; i < trace.m; ++i) out << ",trigger_" << i;
    out << ",attack_support\n";

    for (size_t k = 0; k < trace.steps.size(); ++k) {
        const sim::StepRecord& rec = trace.steps[k];
        out << k;
        auto emit_vec = [&](const Vec& v) {
            for (int i = 0; i < trace.n; ++i)
                out << ',' << format_double(i < v.size() ? v(i) : 0.0);
        };
        emit_vec(rec.x_true);
        emit_vec(rec.x_secure);
        emit_vec(rec.x_luenberger);
        out << ',' << format_double(rec.err_inf_secure) << ','
            << format_double(rec.err_inf_luenberger);
        for (int i = 0; i < trace.m; ++i)
            out << ',' << format_double(i < rec.residues.size() ? rec.residues(i) : 0.0);
        for (int i = 0; i < trace.m; ++i)
            out << ',' << (i < static_cast<int>(rec.triggered.size()) && rec.triggered[i] ? 1 : 0);
        out << ',';
        for (size_t s = 0; s < rec.attack_support.size(); ++s) {
            if (s) out << ';';
            out << rec.attack_support[s];
        }
        out << '\n';
    }
    if (!out) raise(Errc::io_error, "failed writing " + path);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

} // namespace

sim::SimulationTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open " + path);

    std::string header;
    if (!std::getline(in, header)) raise(Errc::parse_error, path + ": empty trace");
    auto cols = split(header, ',');

    int n = 0, m = 0;
    for (const auto& c : cols) {
        if (c.rfind("x_true_", 0) == 0) ++n;
        if (c.rfind("residue_", 0) == 0) ++m;
    }
    if (n == 0 || cols.empty() || cols.front() != "k" || cols.back() != "attack_support")
        raise(Errc::parse_error, path + ": unrecognized trace header");
    const size_t expected = 1 + 3 * static_cast<size_t>(n) + 2 + 2 * static_cast<size_t>(m) + 1;
    if (cols.size() != expected)
        raise(Errc::parse_error, path + ": header has " + std::to_string(cols.size()) +
                                     " columns, expected " + std::to_string(expected));

    sim::SimulationTrace trace;
    trace.n = n;
    trace.m = m;

    std::string line;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != expected)
            raise(Errc::parse_error, path + ":" + std::to_string(lineno) + ": expected " +
                                         std::to_string(expected) + " fields, got " +
                                         std::to_string(f.size()));
        sim::StepRecord rec;
        size_t c = 1;
        auto take_vec = [&](int dim) {
            Vec v(dim);
            for (int i = 0; i < dim; ++i) v(i) = std::stod(f[c++]);
            return v;
        };
        try {
            rec.x_true = take_vec(n);
            rec.x_secure = take_vec(n);
            rec.x_luenberger = take_vec(n);
            rec.err_inf_secure = std::stod(f[c++]);
            rec.err_inf_luenberger = std::stod(f[c++]);
            rec.residues = take_vec(m);
            rec.triggered.resize(m);
            for (int i = 0; i < m; ++i) rec.triggered[i] = f[c++] == "1" ? 1 : 0;
            for (const auto& tok : split(f[c], ';'))
                if (!tok.empty()) rec.attack_support.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            raise(Errc::parse_error, path + ":" + std::to_string(lineno) + ": malformed number");
        }
        trace.steps.push_back(std::move(rec));
    }
    if (trace.steps.empty()) raise(Errc::parse_error, path + ": trace has no data rows");
    return trace;
}

} // namespace secest::io
