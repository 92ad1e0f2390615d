#include <qenergy/error.hpp>
#include <qenergy/workload.hpp>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace qenergy {

namespace {

using nlohmann::json;

const json& field(const json& obj, std::string_view key, std::string_view where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ConfigError(fmt::format("missing key '{}.{}'", where, key));
    }
    return obj.at(std::string(key));
}

template <class T>
T get(const json& obj, std::string_view key, std::string_view where) {
    const auto& v = field(obj, key, where);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("key '{}.{}' has the wrong type", where, key));
    }
}

template <class T>
T get_or(const json& obj, std::string_view key, std::string_view where, T fallback) {
    return obj.contains(key) ? get<T>(obj, key, where) : fallback;
}

template <class T>
std::optional<T> get_opt(const json& obj, std::string_view key, std::string_view where) {
    if (!obj.contains(key) || obj.at(std::string(key)).is_null()) {
        return std::nullopt;
    }
    return get<T>(obj, key, where);
}

json patched(const json& base, const json& fixture, std::string_view section) {
    json out = base.contains(section) ? base.at(std::string(section)) : json::object();
    if (fixture.contains(section)) {
        out.merge_patch(fixture.at(std::string(section)));
    }
    return out;
}

template <class F>
auto guarded(std::string_view where, F&& make) {
    try {
        return make();
    } catch (const ModelError& e) {
        throw ConfigError(fmt::format("fixture '{}': {}", where, e.what()));
    }
}

PvcFixture parse_pvc(const std::string& name, const json& f, const json& hw) {
    const auto cpu = parse_cpu(patched(hw, f, "cpu"));
    const auto disk = parse_disk(patched(hw, f, "disk"));
    const auto where = fmt::format("fixtures.{}", name);
    const auto& p = field(f, "profile", where);
    const auto pwhere = where + ".profile";
    const auto profile = guarded(name, [&] {
        return WorkProfile::make(get<double>(p, "cpu_cycles", pwhere), get<std::uint64_t>(p, "disk_kb", pwhere),
                                 parse_access_pattern(get_or<std::string>(p, "disk_pattern", pwhere, "sequential")),
                                 get_or<std::uint64_t>(p, "disk_block_kb", pwhere, 1), cpu, disk);
    });

    PvcFixture fx{name,
                  get_or<std::string>(f, "provenance", where, ""),
                  cpu,
                  disk,
                  profile,
                  get_or<std::size_t>(f, "queries", where, 10),
                  {},
                  {},
                  std::nullopt};
    if (fx.queries == 0) {
        throw ConfigError(fmt::format("key '{}.queries' must be positive", where));
    }
    if (f.contains("voltage_factors")) {
        for (const auto& [label, v] : field(f, "voltage_factors", where).items()) {
            if (!v.is_number()) {
                throw ConfigError(fmt::format("key '{}.voltage_factors.{}' must be a number", where, label));
            }
            const auto key = guarded(name, [&] { return parse_setting_label(label, cpu).label(); });
            fx.voltage_factors[key] = v.get<double>();
        }
    }
    if (f.contains("targets")) {
        const auto& list = field(f, "targets", where);
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto twhere = fmt::format("{}.targets[{}]", where, i);
            fx.targets.push_back({get<std::string>(list[i], "setting", twhere),
                                  get<double>(list[i], "edp_ratio", twhere),
                                  get_opt<double>(list[i], "time_ratio", twhere),
                                  get_opt<double>(list[i], "energy_ratio", twhere)});
        }
    }
    if (f.contains("expected_stock")) {
        const auto& e = field(f, "expected_stock", where);
        const auto ewhere = where + ".expected_stock";
        fx.expected_stock = StockExpectation{Seconds{get<double>(e, "elapsed_s", ewhere)},
                                             Joules{get<double>(e, "cpu_energy_j", ewhere)},
                                             Joules{get<double>(e, "disk_energy_j", ewhere)}};
    }
    // Surface bad labels and factors at load time rather than mid-sweep.
    guarded(name, [&] {
        for (const auto& [label, v] : fx.voltage_factors) {
            (void)fx.setting(label);
        }
        for (const auto& t : fx.targets) {
            (void)fx.setting(t.setting);
        }
        return 0;
    });
    return fx;
}

QedFixture parse_qed(const std::string& name, const json& f, const json& hw) {
    const auto where = fmt::format("fixtures.{}", name);
    const auto& t = field(f, "table", where);
    const auto twhere = where + ".table";
    const auto& w = field(f, "workload", where);
    const auto wwhere = where + ".workload";

    QedFixture fx{name,
                  get_or<std::string>(f, "provenance", where, ""),
                  parse_cpu(patched(hw, f, "cpu")),
                  parse_disk(patched(hw, f, "disk")),
                  parse_costs(field(f, "costs", where)),
                  get<std::size_t>(t, "rows", twhere),
                  get_or<std::int64_t>(t, "domain_size", twhere, 50),
                  get_or<double>(t, "kb_per_row", twhere, 0.1),
                  get_or<std::uint64_t>(t, "seed", twhere, 0),
                  {},
                  get_or<std::vector<std::size_t>>(f, "batch_sizes", where, {}),
                  {}};
    fx.workload.query_count = get<std::size_t>(w, "query_count", wwhere);
    fx.workload.domain_size = fx.domain_size;
    fx.workload.terms = get_or<std::size_t>(w, "terms", wwhere, 1);
    fx.workload.non_overlapping = get_or<bool>(w, "non_overlapping", wwhere, true);
    fx.workload.seed = get_or<std::uint64_t>(w, "seed", wwhere, 0);
    if (fx.rows == 0 || fx.domain_size <= 0 || !(fx.kb_per_row > 0.0)) {
        throw ConfigError(fmt::format("key '{}' needs positive rows, domain_size and kb_per_row", twhere));
    }
    if (f.contains("targets")) {
        const auto& list = field(f, "targets", where);
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto qwhere = fmt::format("{}.targets[{}]", where, i);
            fx.targets.push_back({get<std::size_t>(list[i], "batch_size", qwhere),
                                  get_opt<double>(list[i], "energy_ratio", qwhere),
                                  get_opt<double>(list[i], "response_ratio", qwhere),
                                  get_opt<double>(list[i], "edp_ratio", qwhere)});
        }
    }
    return fx;
}

} // namespace

std::vector<Query> gen_selection_workload(const SelectionWorkloadSpec& spec) {
    if (spec.query_count == 0 || spec.terms == 0 || spec.domain_size <= 0) {
        throw ModelError("a selection workload needs positive query count, terms and domain size");
    }
    const auto domain = static_cast<std::size_t>(spec.domain_size);
    if (spec.terms > domain) {
        throw ModelError(fmt::format("{} terms per query exceed the domain of {} values", spec.terms, domain));
    }
    if (spec.non_overlapping && spec.query_count * spec.terms > domain) {
        throw ModelError(fmt::format("{} non-overlapping queries of {} terms need more than {} distinct values",
                                     spec.query_count, spec.terms, domain));
    }
    std::mt19937_64 rng(spec.seed);
    std::vector<std::int64_t> values(domain);
    std::iota(values.begin(), values.end(), std::int64_t{1});
    if (spec.non_overlapping) {
        std::shuffle(values.begin(), values.end(), rng);
    }

    std::vector<Query> out;
    out.reserve(spec.query_count);
    for (std::size_t i = 0; i < spec.query_count; ++i) {
        Query q;
        q.id = static_cast<QueryId>(i);
        q.table = spec.table;
        q.predicate.column = spec.column;
        if (spec.non_overlapping) {
            const auto first = values.begin() + static_cast<std::ptrdiff_t>(i * spec.terms);
            q.predicate.values.assign(first, first + static_cast<std::ptrdiff_t>(spec.terms));
        } else {
            std::shuffle(values.begin(), values.end(), rng);
            q.predicate.values.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(spec.terms));
        }
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<WorkProfile> gen_pvc_workload(std::size_t n, const WorkProfile& base) {
    if (n == 0) {
        throw ModelError("a PVC workload needs at least one query");
    }
    return std::vector<WorkProfile>(n, base);
}

PvcSetting PvcFixture::setting(std::string_view label) const {
    auto s = parse_setting_label(label, cpu);
    const auto key = s.label();
    if (const auto it = voltage_factors.find(key); it != voltage_factors.end()) {
        s.downgrade.factor = it->second;
        validate_setting(cpu, s);
    }
    return s;
}

std::vector<PvcSetting> PvcFixture::sweep_settings() const {
    static constexpr std::array<std::string_view, 7> labels = {"stock",    "u5-small", "u10-small", "u15-small",
                                                               "u5-med",   "u10-med",  "u15-med"};
    std::vector<PvcSetting> settings;
    settings.reserve(labels.size());
    for (const auto label : labels) {
        settings.push_back(setting(label));
    }
    return settings;
}

Table QedFixture::make_table() const {
    return generate_table(rows, domain_size, kb_per_row, table_seed, workload.table, workload.column);
}

const PvcFixture& FixtureSet::pvc_fixture(std::string_view name) const {
    const auto it = pvc.find(name);
    if (it == pvc.end()) {
        throw ConfigError(fmt::format("no profile fixture named '{}' (have: {})", name, fmt::join(names(), ", ")));
    }
    return it->second;
}

const QedFixture& FixtureSet::qed_fixture(std::string_view name) const {
    const auto it = qed.find(name);
    if (it == qed.end()) {
        throw ConfigError(fmt::format("no selection fixture named '{}' (have: {})", name, fmt::join(names(), ", ")));
    }
    return it->second;
}

std::vector<std::string> FixtureSet::names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : pvc) {
        out.push_back(k);
    }
    for (const auto& [k, v] : qed) {
        out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    return out;
}

FixtureSet parse_fixtures(const json& doc, const std::filesystem::path& base_dir, const json* hardware) {
    if (!doc.is_object() || !doc.contains("fixtures") || !doc.at("fixtures").is_object() ||
        doc.at("fixtures").empty()) {
        throw ConfigError(fmt::format("missing key 'fixtures'; required fixtures: {}", fmt::join(kRequiredFixtures, ", ")));
    }
    json hw;
    if (hardware != nullptr) {
        hw = *hardware;
    } else {
        const auto& ref = field(doc, "hardware", "fixtures file");
        hw = ref.is_string() ? read_json_file(base_dir / ref.get<std::string>()) : ref;
    }

    const auto& fixtures = doc.at("fixtures");
    std::vector<std::string_view> missing;
    for (const auto name : kRequiredFixtures) {
        if (!fixtures.contains(name)) {
            missing.push_back(name);
        }
    }
    if (!missing.empty()) {
        throw ConfigError(fmt::format("missing fixtures: {} (required: {})", fmt::join(missing, ", "),
                                      fmt::join(kRequiredFixtures, ", ")));
    }

    FixtureSet set{parse_hardware_config(hw), {}, {}};
    for (const auto& [name, f] : fixtures.items()) {
        const auto kind = get<std::string>(f, "kind", fmt::format("fixtures.{}", name));
        if (kind == "profile") {
            set.pvc.emplace(name, parse_pvc(name, f, hw));
        } else if (kind == "selection") {
            set.qed.emplace(name, parse_qed(name, f, hw));
        } else {
            throw ConfigError(fmt::format("key 'fixtures.{}.kind' must be profile or selection, got '{}'", name, kind));
        }
    }
    return set;
}

FixtureSet load_fixtures(const std::filesystem::path& path, const std::filesystem::path& hardware) {
    if (hardware.empty()) {
        return parse_fixtures(read_json_file(path), path.parent_path());
    }
    const auto hw = read_json_file(hardware);
    return parse_fixtures(read_json_file(path), path.parent_path(), &hw);
}

} // namespace qenergy
