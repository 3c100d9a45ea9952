#include "tactoshape/evalkit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include "tactoshape/util/seed.hpp"

namespace tact::evalkit {

void ExperimentSpec::validate() const {
    config.validate();
    budget.validate();
    if (scene_label.empty())
        throw std::invalid_argument("experiment: scene_label must be nonempty");
    if (scene.scene.objects.empty())
        throw std::invalid_argument("experiment: scene has no objects");
}

namespace {

std::size_t thread_cap() {
    if (const char* env = std::getenv("TACTOSHAPE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Shortest decimal form that round-trips; empty for absent (non-finite)
// values so CSV cells stay blank.
std::string cell(double v) {
    if (!std::isfinite(v)) return "";
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lg", &back);
        if (back == v) break;
    }
    return buf;
}

struct Welford {
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    void add(double v) {
        if (!std::isfinite(v)) return;
        sum += v;
        sumsq += v * v;
        ++n;
    }
    Stat stat() const {
        Stat s;
        s.count = n;
        if (n == 0) {
            s.mean = std::numeric_limits<double>::quiet_NaN();
            return s;
        }
        s.mean = sum / static_cast<double>(n);
        if (n > 1) {
            const double var =
                (sumsq - sum * sum / static_cast<double>(n)) /
                static_cast<double>(n - 1);
            s.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
        }
        return s;
    }
};

} // namespace

std::vector<AggregateRow> aggregate_rows(const std::vector<ExperimentRow>& rows) {
    struct Acc {
        Welford wall, jac, cham, area, unc;
    };
    std::map<std::size_t, Acc> by_touch;
    for (const auto& row : rows) {
        auto& acc = by_touch[row.record.touch];
        acc.wall.add(row.record.wall_time_s);
        acc.jac.add(row.record.jaccard);
        acc.cham.add(row.record.chamfer_m);
        acc.area.add(row.record.area_dev);
        acc.unc.add(row.record.mean_uncertainty);
    }
    std::vector<AggregateRow> out;
    for (const auto& [touch, acc] : by_touch) {
        AggregateRow r;
        r.touch = touch;
        r.wall_time_s = acc.wall.stat();
        r.jaccard = acc.jac.stat();
        r.chamfer_m = acc.cham.stat();
        r.area_dev = acc.area.stat();
        r.mean_uncertainty = acc.unc.stat();
        out.push_back(r);
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec,
                                const field::FieldParams& params) {
    spec.validate();
    params.validate();

    ExperimentResult result;
    if (spec.repetitions == 0) return result;

    std::vector<std::vector<ExperimentRow>> per_rep(spec.repetitions);
    std::vector<std::exception_ptr> errors(spec.repetitions);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t rep = next.fetch_add(1);
            if (rep >= spec.repetitions) return;
            try {
                const auto run = pipeline::run_pipeline(
                    spec.scene, params, spec.config, spec.budget,
                    util::mix_seed(spec.seed, rep));
                for (const auto& rec : run.metrics)
                    per_rep[rep].push_back({spec.scene_label, rep, rec});
            } catch (...) {
                errors[rep] = std::current_exception();
            }
        }
    };

    const std::size_t threads =
        std::min(thread_cap(), spec.repetitions);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    for (auto& rows : per_rep)
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    result.aggregate = aggregate_rows(result.rows);
    return result;
}

std::string metrics_csv(const std::vector<ExperimentRow>& rows) {
    std::string out =
        "scene,repetition,touch,wall_time_s,jaccard,chamfer_m,area_dev,"
        "mean_uncertainty\n";
    for (const auto& row : rows) {
        out += row.scene;
        out += ',';
        out += std::to_string(row.repetition);
        out += ',';
        out += std::to_string(row.record.touch);
        out += ',';
        out += cell(row.record.wall_time_s);
        out += ',';
        out += cell(row.record.jaccard);
        out += ',';
        out += cell(row.record.chamfer_m);
        out += ',';
        out += cell(row.record.area_dev);
        out += ',';
        out += cell(row.record.mean_uncertainty);
        out += '\n';
    }
    return out;
}

void write_metrics_csv(const std::vector<ExperimentRow>& rows,
                       const std::string& path) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw std::runtime_error("experiment: cannot open '" + path + "'");
    file << metrics_csv(rows);
}

std::string summary_text(const ExperimentResult& result) {
    std::string out;
    char line[256];
    for (const auto& row : result.aggregate) {
        auto fmt = [](const Stat& s, char* buf, std::size_t cap) {
            if (s.count == 0)
                std::snprintf(buf, cap, "absent");
            else
                std::snprintf(buf, cap, "%.4g +- %.2g (n=%zu)", s.mean,
                              s.stddev, s.count);
        };
        char jac[64], cham[64], area[64], unc[64];
        fmt(row.jaccard, jac, sizeof jac);
        fmt(row.chamfer_m, cham, sizeof cham);
        fmt(row.area_dev, area, sizeof area);
        fmt(row.mean_uncertainty, unc, sizeof unc);
        std::snprintf(line, sizeof line,
                      "touch %zu: jaccard %s | chamfer_m %s | area_dev %s | "
                      "uncertainty %s\n",
                      row.touch, jac, cham, area, unc);
        out += line;
    }
    return out;
}

}  // namespace tact::evalkit
