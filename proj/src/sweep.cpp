#include "hbtc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace hbtc {

std::string_view to_string(SweptVariable v) {
    switch (v) {
    case SweptVariable::SnrDb: return "snr_db";
    case SweptVariable::SampleRatio: return "sample_ratio";
    case SweptVariable::Lambda: return "lambda";
    }
    return "?";
}

std::string_view to_string(Method m) {
    switch (m) {
    case Method::BtdAls: return "BTD_ALS";
    case Method::BtdNls: return "BTD_NLS";
    case Method::CpdAls: return "CPD_ALS";
    case Method::CpdNls: return "CPD_NLS";
    }
    return "?";
}

Method parse_method(std::string_view s) {
    std::string upper(s);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    for (Method m : {Method::BtdAls, Method::BtdNls, Method::CpdAls, Method::CpdNls}) {
        if (to_string(m) == upper) return m;
    }
    throw ConfigError("methods: unknown method '" + std::string(s) + "'");
}

void SweepSpec::validate() const {
    if (values.empty()) throw ConfigError("values: at least one value is required");
    for (std::size_t n = 1; n < values.size(); ++n) {
        if (!(values[n] > values[n - 1])) throw ConfigError("values: must be strictly increasing");
    }
    if (trials == 0) throw ConfigError("trials: must be >= 1");
    if (methods.empty()) throw ConfigError("methods: at least one method is required");
    for (double l : lambda_grid) {
        if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda_grid: entries must be positive");
    }
    gen.validate();
    solver.validate();
    for (double v : values) {
        switch (swept) {
        case SweptVariable::SnrDb:
            if (std::isnan(v)) throw ConfigError("values: SNR must be a number or inf");
            break;
        case SweptVariable::SampleRatio:
            if (!(v > 0.0 && v <= 1.0)) throw ConfigError("values: sample ratios must lie in (0, 1]");
            break;
        case SweptVariable::Lambda:
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("values: lambda values must be positive");
            break;
        }
    }
}

BlockStructure method_structure(Method method, const BlockStructure& truth) {
    if (method == Method::CpdAls || method == Method::CpdNls) return BlockStructure::rank_one(truth.columns());
    return truth;
}

Backend method_backend(Method method) {
    return (method == Method::BtdAls || method == Method::CpdAls) ? Backend::ALS : Backend::GN;
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("HBTC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Job {
    std::size_t value_index;
    std::size_t trial;
};

std::vector<SweepRow> run_job(const SweepSpec& spec, const Job& job) {
    const double value = spec.values[job.value_index];
    GenConfig gen = spec.gen;
    SolverConfig solver = spec.solver;
    const std::uint64_t seed = spec.gen.seed + job.trial;
    gen.seed = seed;
    solver.seed = seed;
    switch (spec.swept) {
    case SweptVariable::SnrDb: gen.snr_db = value; break;
    case SweptVariable::SampleRatio: gen.sample_ratio = value; break;
    case SweptVariable::Lambda: solver.lambda = value; break;
    }
    std::vector<double> lambdas = spec.lambda_grid;
    if (lambdas.empty() || spec.swept == SweptVariable::Lambda) lambdas = {solver.lambda};

    std::vector<SweepRow> rows;
    GroundTruth gt;
    std::string gen_error;
    try {
        gt = generate(gen);
    } catch (const std::exception& e) {
        gen_error = std::string("generation: ") + e.what();
    }

    for (Method method : spec.methods) {
        SweepRow row;
        row.method = method;
        row.swept_value = value;
        row.trial = job.trial;
        row.seed = seed;
        row.lambda = lambdas.front();
        row.error = gen_error;
        if (!gen_error.empty()) {
            rows.push_back(row);
            continue;
        }
        const BlockStructure structure = method_structure(method, gen.structure);
        solver.backend = method_backend(method);

        bool have = false;
        double best_score = 0.0;
        for (double lambda : lambdas) {
            SolverConfig cfg = solver;
            cfg.lambda = lambda;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const SolveReport rep = solve(gt.noisy, gt.mask, structure, cfg);
                row.wall_time += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                const double err = rlne(rep.completed, gt.clean);
                const double harm = harmonicity(rep.factors);
                const double score = spec.lambda_select == LambdaSelect::BestRlne ? -err : harm;
                if (!have || score > best_score) {
                    have = true;
                    best_score = score;
                    row.lambda = lambda;
                    row.rlne = err;
                    row.harmonicity = harm;
                    row.iterations = rep.iterations_run;
                    row.error.clear();
                }
            } catch (const std::exception& e) {
                row.wall_time += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                if (!have) {
                    row.rlne = 1.0;
                    row.error = e.what();
                }
            }
        }
        rows.push_back(row);
    }
    return rows;
}

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    }
    return s;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::vector<SweepAggregate> aggregate(const std::vector<SweepRow>& rows, const std::vector<Method>& method_order) {
    std::vector<SweepAggregate> out;
    for (Method m : method_order) {
        std::map<double, std::vector<double>> by_value;
        for (const auto& r : rows) {
            if (r.method == m) by_value[r.swept_value].push_back(r.rlne);
        }
        for (const auto& [value, errs] : by_value) {
            SweepAggregate a;
            a.method = m;
            a.swept_value = value;
            a.trials = errs.size();
            double sum = 0.0;
            for (double e : errs) sum += e;
            a.mean_rlne = sum / static_cast<double>(errs.size());
            if (errs.size() > 1) {
                double ss = 0.0;
                for (double e : errs) ss += (e - a.mean_rlne) * (e - a.mean_rlne);
                a.std_rlne = std::sqrt(ss / static_cast<double>(errs.size() - 1));
            }
            out.push_back(a);
        }
    }
    return out;
}

SweepResult run_sweep(const SweepSpec& spec, std::size_t threads) {
    spec.validate();
    std::vector<Job> jobs;
    for (std::size_t v = 0; v < spec.values.size(); ++v) {
        for (std::size_t t = 0; t < spec.trials; ++t) jobs.push_back({v, t});
    }
    std::vector<std::vector<SweepRow>> results(jobs.size());
    const std::size_t workers = std::min(threads == 0 ? default_thread_count() : threads, jobs.size());

    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t n = next++; n < jobs.size(); n = next++) results[n] = run_job(spec, jobs[n]);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    SweepResult out;
    for (auto& r : results) out.rows.insert(out.rows.end(), r.begin(), r.end());
    const auto rank = [&](Method m) {
        return static_cast<std::size_t>(std::find(spec.methods.begin(), spec.methods.end(), m) - spec.methods.begin());
    };
    std::stable_sort(out.rows.begin(), out.rows.end(), [&](const SweepRow& a, const SweepRow& b) {
        if (rank(a.method) != rank(b.method)) return rank(a.method) < rank(b.method);
        if (a.swept_value != b.swept_value) return a.swept_value < b.swept_value;
        return a.trial < b.trial;
    });
    out.aggregates = aggregate(out.rows, spec.methods);
    return out;
}

SweepSpec sweep_spec_from(const KeyValueConfig& kv) {
    SweepSpec spec;
    const std::string swept = kv.get_string("swept", "snr_db");
    std::vector<double> defaults;
    KeyValueConfig adjusted = kv;
    if (swept == "snr_db") {
        spec.swept = SweptVariable::SnrDb;
        defaults = {-5, 0, 5, 10, 15, 20, 25};
    } else if (swept == "sample_ratio") {
        spec.swept = SweptVariable::SampleRatio;
        defaults = {0.03, 0.06, 0.09, 0.12, 0.15};
        if (!kv.has("snr_db")) adjusted.set("snr_db", "20");
    } else if (swept == "lambda") {
        spec.swept = SweptVariable::Lambda;
        defaults = {0.01, 0.1, 1, 10, 100};
    } else {
        throw ConfigError("swept: expected snr_db, sample_ratio or lambda, got '" + swept + "'");
    }
    spec.gen = gen_config_from(adjusted);
    spec.solver = solver_config_from(adjusted);
    spec.values = kv.get_doubles("values", defaults);
    spec.trials = kv.get_uint("trials", 50);
    spec.methods.clear();
    for (const auto& m : kv.get_strings("methods", {"BTD_ALS"})) spec.methods.push_back(parse_method(m));
    spec.lambda_grid = kv.get_doubles("lambda_grid", {});
    const std::string select = kv.get_string("lambda_select", "best_rlne");
    if (select == "best_rlne") {
        spec.lambda_select = LambdaSelect::BestRlne;
    } else if (select == "harmonicity") {
        spec.lambda_select = LambdaSelect::Harmonicity;
    } else {
        throw ConfigError("lambda_select: expected best_rlne or harmonicity, got '" + select + "'");
    }
    spec.validate();
    return spec;
}

void write_rows_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "method,swept_value,trial,seed,lambda,rlne,harmonicity,iterations,wall_time,error\n";
    for (const auto& r : rows) {
        out << to_string(r.method) << ',' << fmt_double(r.swept_value) << ',' << r.trial << ',' << r.seed << ','
            << fmt_double(r.lambda) << ',' << fmt_double(r.rlne) << ',' << fmt_double(r.harmonicity) << ','
            << r.iterations << ',' << fmt_double(r.wall_time) << ',' << sanitize(r.error) << '\n';
    }
}

void write_aggregates_csv(std::ostream& out, const std::vector<SweepAggregate>& aggs) {
    out << "method,swept_value,mean_rlne,std_rlne,trials\n";
    for (const auto& a : aggs) {
        out << to_string(a.method) << ',' << fmt_double(a.swept_value) << ',' << fmt_double(a.mean_rlne) << ','
            << fmt_double(a.std_rlne) << ',' << a.trials << '\n';
    }
}

std::vector<SweepRow> read_rows_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) ||
        line != "method,swept_value,trial,seed,lambda,rlne,harmonicity,iterations,wall_time,error") {
        throw FormatError("rows CSV: unexpected header");
    }
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) f.push_back(item);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 10) throw FormatError("rows CSV: expected 10 fields");
        try {
            SweepRow r;
            r.method = parse_method(f[0]);
            r.swept_value = parse_double(f[1], "swept_value");
            r.trial = std::stoull(f[2]);
            r.seed = std::stoull(f[3]);
            r.lambda = parse_double(f[4], "lambda");
            r.rlne = parse_double(f[5], "rlne");
            r.harmonicity = parse_double(f[6], "harmonicity");
            r.iterations = std::stoull(f[7]);
            r.wall_time = parse_double(f[8], "wall_time");
            r.error = f[9];
            rows.push_back(std::move(r));
        } catch (const std::logic_error& e) {
            throw FormatError(std::string("rows CSV: ") + e.what());
        }
    }
    return rows;
}

} // namespace hbtc
