#include "secest/json_io.hpp"

#include <fstream>

#include <json.hpp>

#include "secest/errors.hpp"

namespace secest::io {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::io_error, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        raise(Errc::parse_error, path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::io_error, "cannot open " + path + " for writing");
    out << text;
    if (!out) raise(Errc::io_error, "failed writing " + path);
}

cplx parse_entry(const json& e, const std::string& where, bool* saw_complex) {
    if (e.is_number()) return cplx(e.get<double>(), 0.0);
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        if (saw_complex && e[1].get<double>() != 0.0) *saw_complex = true;
        return cplx(e[0].get<double>(), e[1].get<double>());
    }
    raise(Errc::parse_error, where + ": matrix entries must be numbers or [re, im] pairs");
}

CMat parse_matrix(const json& j, const std::string& name, bool* saw_complex) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        raise(Errc::parse_error, name + " must be a nonempty array of rows");
    const size_t rows = j.size();
    const size_t cols = j[0].size();
    CMat m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            raise(Errc::parse_error, name + ": ragged rows");
        for (size_t c = 0; c < cols; ++c)
            m(r, c) = parse_entry(j[r][c], name, saw_complex);
    }
    return m;
}

json complex_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

double require_number(const json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_number())
        raise(Errc::parse_error, "missing or non-numeric field \"" + key + "\"");
    return j[key].get<double>();
}

} // namespace

SystemFile load_system_file(const std::string& path) {
    json j = load_json(path);
    SystemFile file;

    std::string mode = j.value("modal_mode", std::string("diagonalize"));
    if (mode == "diagonalize")
        file.mode = model::ModalMode::diagonalize;
    else if (mode == "already_jordan")
        file.mode = model::ModalMode::already_jordan;
    else
        raise(Errc::parse_error, "modal_mode must be \"diagonalize\" or \"already_jordan\"");

    bool complex_a = false, complex_c = false;
    if (!j.contains("A") || !j.contains("C"))
        raise(Errc::parse_error, "system file requires \"A\" and \"C\"");
    CMat A = parse_matrix(j["A"], "A", &complex_a);
    CMat C = parse_matrix(j["C"], "C", &complex_c);

    file.process_bound = require_number(j, "B_w");
    file.measurement_bound = require_number(j, "B_v");
    file.sample_time = j.value("Ts", 1.0);
    file.p = j.value("p", 0);
    if (file.p < 0) raise(Errc::parse_error, "p must be nonnegative");
    if (file.process_bound < 0.0 || file.measurement_bound < 0.0)
        raise(Errc::parse_error, "noise bounds must be nonnegative");

    if (complex_a || complex_c) {
        if (file.mode != model::ModalMode::already_jordan)
            raise(Errc::parse_error, "complex entries require modal_mode \"already_jordan\"");
        file.modal_direct = std::make_pair(std::move(A), std::move(C));
    } else {
        model::RawSystem raw;
        raw.A = A.real();
        raw.C = C.real();
        raw.process_noise_bound = file.process_bound;
        raw.measurement_noise_bound = file.measurement_bound;
        raw.sample_time = file.sample_time;
        file.raw = std::move(raw);
    }
    return file;
}

model::SystemModel assemble(const SystemFile& file) {
    if (file.raw) return model::make_system(*file.raw, file.mode, file.p);

    model::SystemModel sys;
    sys.modal = model::modal_from_jordan(file.modal_direct->first, file.modal_direct->second);
    sys.max_attack_sparsity = file.p;
    if (!model::modal_observable(sys.modal))
        raise(Errc::not_observable, "the supplied modal pair is not observable");
    return sys;
}

threat::AttackScenario load_scenario(const std::string& path) {
    json root = load_json(path);
    if (!root.contains("attack")) raise(Errc::parse_error, "scenario file requires \"attack\"");
    const json& j = root["attack"];

    threat::AttackScenario sc;
    std::string kind = j.value("kind", std::string("none"));
    if (kind == "none")
        sc.kind = threat::AttackScenario::Kind::none;
    else if (kind == "fixed_set")
        sc.kind = threat::AttackScenario::Kind::fixed_set;
    else if (kind == "switching_schedule")
        sc.kind = threat::AttackScenario::Kind::switching_ieee14;
    else if (kind == "custom_schedule")
        sc.kind = threat::AttackScenario::Kind::custom_schedule;
    else
        raise(Errc::parse_error, "unknown attack kind \"" + kind + "\"");

    sc.sparsity = j.value("p", 0);
    sc.seed = j.value("seed", 0ULL);
    if (j.contains("sensors")) sc.sensors = j["sensors"].get<std::vector<int>>();
    if (j.contains("schedule"))
        sc.schedule = j["schedule"].get<std::vector<std::vector<int>>>();

    if (j.contains("signal")) {
        const json& s = j["signal"];
        std::string type = s.value("type", std::string("constant"));
        if (type == "random_uniform")
            sc.signal = threat::AttackSignal::uniform(require_number(s, "lo"), require_number(s, "hi"));
        else if (type == "slope")
            sc.signal = threat::AttackSignal::slope(require_number(s, "rate"));
        else if (type == "constant")
            sc.signal = threat::AttackSignal::constant(require_number(s, "value"));
        else
            raise(Errc::parse_error, "unknown signal type \"" + type + "\"");
    }

    if (sc.kind == threat::AttackScenario::Kind::fixed_set &&
        static_cast<int>(sc.sensors.size()) > sc.sparsity)
        raise(Errc::sparsity_violated, "fixed support exceeds the declared budget p");
    return sc;
}

void save_scenario(const threat::AttackScenario& sc, const std::string& path) {
    json s;
    switch (sc.signal.kind) {
    case threat::AttackSignal::Kind::random_uniform:
        s = {{"type", "random_uniform"}, {"lo", sc.signal.lo}, {"hi", sc.signal.hi}};
        break;
    case threat::AttackSignal::Kind::slope:
        s = {{"type", "slope"}, {"rate", sc.signal.rate}};
        break;
    case threat::AttackSignal::Kind::constant:
        s = {{"type", "constant"}, {"value", sc.signal.value}};
        break;
    }
    const char* kind = "none";
    switch (sc.kind) {
    case threat::AttackScenario::Kind::none: kind = "none"; break;
    case threat::AttackScenario::Kind::fixed_set: kind = "fixed_set"; break;
    case threat::AttackScenario::Kind::switching_ieee14: kind = "switching_schedule"; break;
    case threat::AttackScenario::Kind::custom_schedule: kind = "custom_schedule"; break;
    }
    json j = {{"attack",
               {{"kind", kind},
                {"p", sc.sparsity},
                {"seed", sc.seed},
                {"signal", s}}}};
    if (!sc.sensors.empty()) j["attack"]["sensors"] = sc.sensors;
    if (!sc.schedule.empty()) j["attack"]["schedule"] = sc.schedule;
    write_text(path, j.dump(2) + "\n");
}

void save_gains(const std::vector<gains::GainDesign>& designs,
                const gains::DetectorConfig& detector, const std::string& path) {
    json sensors = json::array();
    for (size_t i = 0; i < designs.size(); ++i) {
        json L = json::array();
        for (Eigen::Index k = 0; k < designs[i].gain.size(); ++k)
            L.push_back(complex_to_json(designs[i].gain(k)));
        json entry = {{"L", L},
                      {"sigma", designs[i].sigma},
                      {"cost", designs[i].cost},
                      {"alpha", designs[i].alpha},
                      {"beta", designs[i].beta}};
        if (i < detector.thresholds.size()) entry["threshold"] = detector.thresholds[i];
        if (i < detector.inequality_ok.size())
            entry["eq15"] = static_cast<bool>(detector.inequality_ok[i]);
        sensors.push_back(entry);
    }
    json j = {{"gamma", detector.gamma}, {"sensors", sensors}};
    write_text(path, j.dump(2) + "\n");
}

std::pair<std::vector<gains::GainDesign>, gains::DetectorConfig>
load_gains(const std::string& path) {
    json j = load_json(path);
    if (!j.contains("sensors") || !j["sensors"].is_array())
        raise(Errc::parse_error, "gains file requires a \"sensors\" array");
    std::vector<gains::GainDesign> designs;
    gains::DetectorConfig det;
    det.gamma = require_number(j, "gamma");
    for (const json& e : j["sensors"]) {
        gains::GainDesign d;
        const json& L = e.at("L");
        d.gain = CVec(L.size());
        for (size_t k = 0; k < L.size(); ++k)
            d.gain(static_cast<Eigen::Index>(k)) = parse_entry(L[k], "L", nullptr);
        d.sigma = e.value("sigma", 0.0);
        d.cost = e.value("cost", 0.0);
        d.alpha = e.value("alpha", 0.0);
        d.beta = e.value("beta", 0.0);
        det.thresholds.push_back(e.value("threshold", 0.0));
        det.inequality_ok.push_back(e.value("eq15", false));
        designs.push_back(std::move(d));
    }
    return {std::move(designs), std::move(det)};
}

ieee14::Ieee14Params load_ieee14_params(const std::string& path) {
    json j = load_json(path);
    ieee14::Ieee14Params p = ieee14::Ieee14Params::defaults();
    auto fill = [&](const char* key, std::array<double, ieee14::kBusCount>& dst) {
        if (!j.contains(key)) return;
        auto v = j[key].get<std::vector<double>>();
        if (v.size() != dst.size())
            raise(Errc::parse_error, std::string(key) + " must list all 14 buses");
        std::copy(v.begin(), v.end(), dst.begin());
    };
    fill("inertia", p.inertia);
    fill("damping", p.damping);
    fill("injection", p.injection);
    if (j.contains("Ts")) p.sample_time = j["Ts"].get<double>();
    if (j.contains("ground_reference")) p.ground_reference = j["ground_reference"].get<bool>();
    if (j.contains("lines")) {
        p.lines.clear();
        for (const json& line : j["lines"]) {
            if (!line.is_array() || line.size() != 3)
                raise(Errc::parse_error, "lines entries must be [bus_a, bus_b, susceptance]");
            p.lines.emplace_back(line[0].get<int>(), line[1].get<int>(), line[2].get<double>());
        }
    }
    return p;
}

std::string analysis_report_json(const model::SystemModel& sys,
                                 const std::vector<subspace::SensorDecomposition>& decs,
                                 const subspace::CoverageIndex& cov, int s_max,
                                 const std::vector<subspace::CheckReport>& checks,
                                 double modal_condition) {
    json per_sensor = json::array();
    for (size_t i = 0; i < decs.size(); ++i) {
        json entry = {{"sensor", decs[i].sensor},
                      {"Q", decs[i].observed},
                      {"n_i", decs[i].dim()}};
        if (i < checks.size())
            entry["checks"] = {{"intertwining", checks[i].intertwining},
                               {"output_identity", checks[i].output_identity},
                               {"projection", checks[i].projection},
                               {"reduced_rank", checks[i].reduced_rank},
                               {"max_residual", checks[i].max_residual}};
        per_sensor.push_back(entry);
    }

    json eigs = json::array();
    for (const auto& b : sys.modal.blocks)
        eigs.push_back({{"eigenvalue", complex_to_json(b.eigenvalue)},
                        {"start", b.start},
                        {"size", b.size}});

    bool strong = s_max >= 2 * sys.max_attack_sparsity;
    json j = {{"n", sys.n()},
              {"m", sys.m()},
              {"p", sys.max_attack_sparsity},
              {"blocks", eigs},
              {"modal_condition_number", modal_condition},
              {"per_sensor", per_sensor},
              {"coverage_counts", cov.counts},
              {"s_max", s_max},
              {"sparse_observability_2p", strong}};
    return j.dump(2) + "\n";
}

std::string metrics_json(const sim::MetricsReport& rep) {
    json resets = json::array();
    for (const auto& r : rep.resets)
        resets.push_back({{"k", r.k},
                          {"sensor", r.sensor},
                          {"before", r.before},
                          {"after", r.after},
                          {"threshold", r.threshold}});
    json j = {{"gamma", rep.gamma},
              {"thresholds", rep.thresholds},
              {"max_err_inf_secure", rep.max_err_secure},
              {"mean_err_inf_secure", rep.mean_err_secure},
              {"max_err_inf_luenberger", rep.max_err_luenberger},
              {"mean_err_inf_luenberger", rep.mean_err_luenberger},
              {"max_err_modal_secure", rep.max_err_modal_secure},
              {"triggers_attacked", rep.triggers_attacked},
              {"triggers_benign", rep.triggers_benign},
              {"false_trigger_count", rep.false_trigger_count},
              {"reset_events", resets}};
    return j.dump(2) + "\n";
}

} // namespace secest::io
