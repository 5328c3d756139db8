#pragma once

// Parameter sweeps over (nu, mu, omega) grids with a shared-nothing worker
// pool.  Each grid point runs one task (full classification, Lyapunov
// spectrum only, rotation number only, or the annulus-map horseshoe check)
// and contributes one orbit-summary CSV row; rows are written in grid order
// and flushed as they complete, so an interrupted sweep can resume by
// counting the rows already on disk.  Per-point failures are logged and
// recorded in the row, never fatal.

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "classify.hpp"
#include "csv.hpp"
#include "horseshoe.hpp"
#include "route.hpp"

namespace hetlab {

enum class SweepTask { classify, lyapunov, rotation, horseshoe };

inline const char* to_string(SweepTask t) {
    switch (t) {
        case SweepTask::classify: return "classify";
        case SweepTask::lyapunov: return "lyapunov";
        case SweepTask::rotation: return "rotation";
        case SweepTask::horseshoe: return "horseshoe";
    }
    return "?";
}

inline SweepTask sweep_task_from(const std::string& s) {
    if (s == "classify") return SweepTask::classify;
    if (s == "lyapunov") return SweepTask::lyapunov;
    if (s == "rotation") return SweepTask::rotation;
    if (s == "horseshoe") return SweepTask::horseshoe;
    throw std::invalid_argument("unknown sweep task: '" + s + "'");
}

struct SweepAxis {
    std::string name;   // nu | mu | omega
    double lo = 0, hi = 0;
    int count = 0;

    double value(int i) const { return lo + (hi - lo) * i / (count - 1); }
};

struct SweepSpec {
    SystemParams base{};
    std::vector<SweepAxis> axes;   // 1 or 2 axes, distinct names
    SweepTask task = SweepTask::classify;
    std::uint64_t seed = 1;
    ClassifyOptions cls{};
    int horseshoe_grid = 120;      // verification grid for the horseshoe task

    std::size_t grid_size() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= std::size_t(a.count);
        return n;
    }

    void validate() const {
        if (axes.empty() || axes.size() > 2)
            throw std::invalid_argument("sweep spec: need 1 or 2 axes");
        for (const auto& a : axes) {
            if (a.name != "nu" && a.name != "mu" && a.name != "omega")
                throw std::invalid_argument("sweep spec: axis must be nu, mu or omega, got '" +
                                            a.name + "'");
            if (a.count < 2) throw std::invalid_argument("sweep spec: axis count must be >= 2");
            if (!(a.lo < a.hi)) throw std::invalid_argument("sweep spec: axis range is empty");
            if (a.name == "omega" && !(a.lo > 0))
                throw std::invalid_argument("sweep spec: omega range must be positive");
            if ((a.name == "nu" || a.name == "mu") && a.lo < 0)
                throw std::invalid_argument("sweep spec: " + a.name + " range must be >= 0");
        }
        if (axes.size() == 2 && axes[0].name == axes[1].name)
            throw std::invalid_argument("sweep spec: duplicate axis '" + axes[0].name + "'");
        // the fixed values must themselves be admissible
        params_at_values(base, axes.size() == 2 ? std::vector<double>{axes[0].lo, axes[1].lo}
                                                : std::vector<double>{axes[0].lo})
            .validate();
    }

    SystemParams params_at(std::size_t idx) const {
        std::vector<double> vals(axes.size());
        if (axes.size() == 1) {
            vals[0] = axes[0].value(int(idx));
        } else {
            vals[0] = axes[0].value(int(idx / std::size_t(axes[1].count)));
            vals[1] = axes[1].value(int(idx % std::size_t(axes[1].count)));
        }
        return params_at_values(base, vals);
    }

  private:
    SystemParams params_at_values(SystemParams p, const std::vector<double>& vals) const {
        for (std::size_t k = 0; k < axes.size(); ++k) {
            if (axes[k].name == "nu") p.nu = vals[k];
            else if (axes[k].name == "mu") p.mu = vals[k];
            else p.omega = vals[k];
        }
        return p;
    }
};

struct RunManifest {
    std::uint64_t config_hash = 0;
    std::string version = version_string;
    std::string started, finished;     // UTC, second resolution
    std::vector<std::string> outputs;

    std::string str() const {
        std::string out;
        out += "config_hash = " + hex64(config_hash) + '\n';
        out += "version = " + version + '\n';
        out += "started = " + started + '\n';
        out += "finished = " + finished + '\n';
        for (const auto& f : outputs) out += "output = " + f + '\n';
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("manifest: cannot open " + path);
        f << str();
    }
};

namespace sdetail {

inline std::string utc_now() {
    char buf[32];
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline const std::vector<std::string>& orbit_summary_columns() {
    static const std::vector<std::string> cols = {"nu",      "mu",  "omega", "seed", "lambda1",
                                                  "lambda2", "lambda3", "rho", "class"};
    return cols;
}

// one grid point -> one orbit-summary row; never throws (failures become
// class = "failed" rows so the grid stays rectangular)
inline std::vector<CsvCell> sweep_row(const SweepSpec& spec, std::size_t idx,
                                      std::string* error_out) {
    const SystemParams p = spec.params_at(idx);
    const double qnan = std::numeric_limits<double>::quiet_NaN();
    std::vector<CsvCell> row{p.nu, p.mu, p.omega, spec.seed, qnan, qnan, qnan, qnan, "failed"};
    try {
        switch (spec.task) {
            case SweepTask::classify: {
                const Classification c =
                    classify_attractor(p, rdetail::seeded_ic(spec.seed, int(idx)), 0.0, spec.cls);
                for (int k = 0; k < 3; ++k) row[std::size_t(4 + k)] = c.lyap.exponents[k];
                row[7] = c.rotation.value;
                row[8] = to_string(c.type);
                break;
            }
            case SweepTask::lyapunov: {
                const State4 ic = rdetail::seeded_ic(spec.seed, int(idx));
                const double t_transient = spec.cls.n_transient * std::numbers::pi / p.omega;
                const LyapunovResult l =
                    lyapunov_spectrum(p, ic, t_transient, spec.cls.t_lyapunov, spec.cls.integ);
                for (int k = 0; k < 3; ++k) row[std::size_t(4 + k)] = l.exponents[k];
                row[8] = l.chaotic ? "chaotic" : "nonchaotic";
                break;
            }
            case SweepTask::rotation: {
                StrobeMap S(p, 0.0, spec.cls.integ);
                const State4 ic = rdetail::seeded_ic(spec.seed, int(idx));
                Eigen::Vector3d x(ic.x1, ic.x2, ic.x3);
                for (int i = 0; i < spec.cls.n_transient; ++i) x = S.apply(x);
                std::vector<Eigen::Vector3d> xs(std::size_t(spec.cls.n_samples));
                for (auto& v : xs) {
                    x = S.apply(x);
                    if (!(x.norm() < spec.cls.escape_radius))
                        throw Divergence("orbit escaped during rotation sampling");
                    v = x;
                }
                row[7] = rotation_number(xs).value;
                row[8] = "rotation";
                break;
            }
            case SweepTask::horseshoe: {
                const ReturnMapModel m = ReturnMapModel::from_system(p);
                try {
                    const ConleyMoserReport rep =
                        verify_conley_moser(m, build_domain(m), spec.horseshoe_grid);
                    row[8] = rep.pass() ? "horseshoe_pass" : "horseshoe_fail";
                } catch (const NoWindow&) {
                    row[8] = "horseshoe_no_window";
                }
                break;
            }
        }
    } catch (const std::exception& e) {
        if (error_out) *error_out = e.what();
    }
    return row;
}

} // namespace sdetail

// Worker count: env override first, hardware concurrency otherwise.
inline int sweep_worker_count(const char* env_name = "HETLAB_WORKERS") {
    if (const char* env = std::getenv(env_name)) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1)
            throw std::invalid_argument(std::string(env_name) + " must be a positive integer, got '" +
                                        env + "'");
        return int(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

struct SweepResult {
    CsvTable table;
    RunManifest manifest;
    std::size_t failures = 0;
    std::size_t resumed_rows = 0;   // grid points skipped because already on disk
};

// Run the sweep, appending rows to csv_path (empty: in-memory only).  When
// the file already holds rows from an interrupted run with the same header,
// those grid points are skipped.  Rows land in grid order regardless of
// which worker finishes first.
inline SweepResult run_sweep(const SweepSpec& spec, const std::string& csv_path = "",
                             std::uint64_t config_hash = 0, int workers = -1,
                             std::ostream* log = nullptr) {
    spec.validate();
    if (workers < 0) workers = sweep_worker_count();
    if (workers < 1) throw std::invalid_argument("run_sweep: workers must be >= 1");

    SweepResult res{CsvTable(sdetail::orbit_summary_columns()), {}, 0, 0};
    res.manifest.config_hash = config_hash;
    res.manifest.started = sdetail::utc_now();

    const std::size_t total = spec.grid_size();
    const std::string header_line = [&] {
        CsvTable t(sdetail::orbit_summary_columns());
        return t.str();
    }();

    // resume bookkeeping: count complete data rows already present
    std::size_t start = 0;
    std::string carried;
    if (!csv_path.empty()) {
        std::ifstream in(csv_path, std::ios::binary);
        if (in) {
            std::ostringstream ss;
            ss << in.rdbuf();
            carried = ss.str();
            if (!carried.empty()) {
                if (carried.compare(0, header_line.size(), header_line) != 0)
                    throw std::invalid_argument("run_sweep: existing file '" + csv_path +
                                                "' does not match the sweep header; refusing");
                for (std::size_t pos = header_line.size();
                     (pos = carried.find('\n', pos)) != std::string::npos; ++pos)
                    ++start;
                if (start > total)
                    throw std::invalid_argument("run_sweep: existing file has more rows than grid");
            }
        }
    }
    res.resumed_rows = start;

    std::ofstream out;
    if (!csv_path.empty()) {
        out.open(csv_path, std::ios::binary | (start ? std::ios::app : std::ios::trunc));
        if (!out) throw std::runtime_error("run_sweep: cannot open " + csv_path);
        if (start == 0) {
            out << header_line;
            out.flush();
        }
    }

    std::vector<std::optional<std::vector<std::string>>> slots(total);
    std::vector<std::pair<std::size_t, std::string>> errors;
    std::mutex mtx;
    std::condition_variable cv;
    std::atomic<std::size_t> next{start};

    auto work = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= total) return;
            std::string err;
            const std::vector<CsvCell> cells = sdetail::sweep_row(spec, idx, &err);
            std::vector<std::string> texts;
            texts.reserve(cells.size());
            for (const auto& c : cells) texts.push_back(c.text());
            std::lock_guard<std::mutex> lk(mtx);
            if (!err.empty()) errors.emplace_back(idx, err);
            slots[idx] = std::move(texts);
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    const int n_threads = int(std::min<std::size_t>(std::size_t(workers), total - start + 1));
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(work);

    for (std::size_t i = start; i < total; ++i) {
        std::unique_lock<std::mutex> lk(mtx);
        cv.wait(lk, [&] { return slots[i].has_value(); });
        const std::vector<std::string> row = std::move(*slots[i]);
        slots[i].reset();
        lk.unlock();
        std::vector<CsvCell> cells;
        cells.reserve(row.size());
        for (const auto& t : row) cells.emplace_back(t);
        res.table.add_row({cells[0], cells[1], cells[2], cells[3], cells[4], cells[5], cells[6],
                           cells[7], cells[8]});
        if (out.is_open()) {
            for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
            out << '\n';
            out.flush();   // partial results survive interruption
        }
    }
    for (auto& t : pool) t.join();

    res.failures = errors.size();
    if (log) {
        std::sort(errors.begin(), errors.end());
        for (const auto& [idx, what] : errors)
            *log << "sweep point " << idx << " failed: " << what << '\n';
    }
    res.manifest.finished = sdetail::utc_now();
    if (!csv_path.empty()) res.manifest.outputs.push_back(csv_path);
    return res;
}

} // namespace hetlab
