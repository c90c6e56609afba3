#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mlo/errors.hpp"

namespace mlo::traffic {

struct Arrival {
    double time = 0;  ///< seconds
    double bits = 0;

    bool operator==(const Arrival&) const = default;
};

/// Sequential arrival generator. Times are nondecreasing; packets sharing a
/// timestamp form a batch.
class TrafficSource {
public:
    virtual ~TrafficSource() = default;
    virtual std::optional<Arrival> next() = 0;
};

/// Poisson arrivals at `rate` packets/s with fixed size.
class PoissonSource final : public TrafficSource {
public:
    PoissonSource(double rate, double packet_bits, std::uint64_t seed)
        : rate_(rate), bits_(packet_bits), rng_(seed) {
        if (!(rate >= 0.0) || !std::isfinite(rate)) throw InvalidParameter("poisson rate must be >= 0");
        if (!(packet_bits > 0.0)) throw InvalidParameter("packet size must be positive");
    }

    std::optional<Arrival> next() override {
        if (rate_ == 0.0) return std::nullopt;
        now_ += std::exponential_distribution<double>(rate_)(rng_);
        return Arrival{now_, bits_};
    }

private:
    double rate_;
    double bits_;
    double now_ = 0;
    std::mt19937_64 rng_;
};

/// Replays a fixed arrival list (tests and hand-built scenarios).
class ScriptedSource final : public TrafficSource {
public:
    explicit ScriptedSource(std::vector<Arrival> arrivals) : arrivals_(std::move(arrivals)) {
        for (std::size_t i = 1; i < arrivals_.size(); ++i)
            if (arrivals_[i].time < arrivals_[i - 1].time)
                throw InvalidParameter("scripted arrivals must be time ordered");
    }

    std::optional<Arrival> next() override {
        if (pos_ >= arrivals_.size()) return std::nullopt;
        return arrivals_[pos_++];
    }

private:
    std::vector<Arrival> arrivals_;
    std::size_t pos_ = 0;
};

/// Splits `bits` into MTU-sized packets; the last one carries the remainder.
inline std::vector<double> fragment(double bits, double mtu_bits) {
    std::vector<double> out;
    if (!(bits > 0.0)) return out;
    const auto full = static_cast<std::size_t>(std::floor(bits / mtu_bits));
    out.assign(full, mtu_bits);
    const double rest = bits - static_cast<double>(full) * mtu_bits;
    if (rest > 1e-9) out.push_back(rest);
    return out;
}

// ---------------------------------------------------------------------------
// Trace replay
// ---------------------------------------------------------------------------

/// One line of a `t_us,bytes` trace.
struct TraceRecord {
    double t_us = 0;
    double bytes = 0;
};

namespace detail {

inline bool parse_number(const std::string& field, double& out) {
    std::size_t pos = 0;
    std::string s = field;
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return false;
    s = s.substr(first);
    try {
        out = std::stod(s, &pos);
    } catch (const std::exception&) {
        return false;
    }
    return pos == s.size() && std::isfinite(out);
}

}  // namespace detail

/// Parses ASCII `t_us,bytes` lines with an optional header line.
/// Throws TraceParseError (with 1-based line number) on malformed input,
/// non-positive sizes, or decreasing timestamps.
inline std::vector<TraceRecord> parse_trace(std::istream& in) {
    std::vector<TraceRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto comma = line.find(',');
        TraceRecord r;
        const bool ok = comma != std::string::npos && line.find(',', comma + 1) == std::string::npos &&
                        detail::parse_number(line.substr(0, comma), r.t_us) &&
                        detail::parse_number(line.substr(comma + 1), r.bytes);
        if (!ok) {
            if (line_no == 1 && records.empty()) continue;  // header
            throw TraceParseError(line_no, "expected `t_us,bytes`, got `" + line + "`");
        }
        if (r.t_us < 0) throw TraceParseError(line_no, "negative timestamp");
        if (!(r.bytes > 0)) throw TraceParseError(line_no, "size must be positive");
        if (!records.empty() && r.t_us < records.back().t_us)
            throw TraceParseError(line_no, "timestamps must be nondecreasing");
        records.push_back(r);
    }
    return records;
}

inline std::vector<TraceRecord> read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trace file: " + path);
    return parse_trace(in);
}

struct TraceOptions {
    bool loop = false;
    double mtu_bits = 12000;
    /// Replay period in seconds; 0 derives it as last timestamp plus the mean
    /// inter-record gap.
    double period_s = 0;
    /// Shift the whole replay by a seeded uniform offset in [0, period).
    bool random_phase = false;
};

class TraceSource final : public TrafficSource {
public:
    TraceSource(std::vector<TraceRecord> records, TraceOptions opts, std::uint64_t seed)
        : records_(std::move(records)), opts_(opts) {
        if (!(opts_.mtu_bits > 0.0)) throw InvalidParameter("mtu must be positive");
        period_ = opts_.period_s;
        if (period_ <= 0.0 && !records_.empty()) {
            const double first = records_.front().t_us * 1e-6;
            const double last = records_.back().t_us * 1e-6;
            const double gap = records_.size() > 1 ? (last - first) / static_cast<double>(records_.size() - 1)
                                                   : 1e-3;
            period_ = last + (gap > 0 ? gap : 1e-3);
        }
        if (opts_.random_phase && period_ > 0.0) {
            std::mt19937_64 rng(seed);
            offset_ = std::uniform_real_distribution<double>(0.0, period_)(rng);
        }
    }

    TraceSource(const std::string& path, TraceOptions opts, std::uint64_t seed)
        : TraceSource(read_trace(path), opts, seed) {}

    double period() const { return period_; }

    std::optional<Arrival> next() override {
        while (pending_.empty()) {
            if (records_.empty()) return std::nullopt;
            if (index_ == records_.size()) {
                if (!opts_.loop) return std::nullopt;
                index_ = 0;
                ++cycle_;
            }
            const TraceRecord& r = records_[index_++];
            const double t = offset_ + static_cast<double>(cycle_) * period_ + r.t_us * 1e-6;
            for (double bits : fragment(r.bytes * 8.0, opts_.mtu_bits)) pending_.push_back(Arrival{t, bits});
        }
        Arrival a = pending_.front();
        pending_.pop_front();
        return a;
    }

private:
    std::vector<TraceRecord> records_;
    TraceOptions opts_;
    double period_ = 0;
    double offset_ = 0;
    std::size_t index_ = 0;
    std::uint64_t cycle_ = 0;
    std::deque<Arrival> pending_;
};

// ---------------------------------------------------------------------------
// Synthetic cloud-gaming video
// ---------------------------------------------------------------------------

enum class Resolution { p720, p1080, p2160 };

inline double resolution_load_bps(Resolution r) {
    switch (r) {
        case Resolution::p720: return 10e6;
        case Resolution::p1080: return 20e6;
        case Resolution::p2160: return 40e6;
    }
    return 0;
}

inline std::string to_string(Resolution r) {
    switch (r) {
        case Resolution::p720: return "720p";
        case Resolution::p1080: return "1080p";
        case Resolution::p2160: return "2160p";
    }
    return "?";
}

inline Resolution parse_resolution(const std::string& s) {
    if (s == "720p") return Resolution::p720;
    if (s == "1080p") return Resolution::p1080;
    if (s == "2160p" || s == "4k" || s == "4K") return Resolution::p2160;
    throw ConfigError("unknown resolution `" + s + "` (expected 720p, 1080p or 2160p)");
}

/// Frame-level video model. Sizes are a normal around the mean with
/// coefficient of variation `frame_size_cv`, floored at one MTU; frame
/// instants are periodic with a uniform jitter of +-frame_jitter/2 periods.
struct VideoParams {
    double fps = 60;
    double mean_frame_bits = 20e6 / 60;
    double frame_size_cv = 0.2;
    double frame_jitter = 0.0;  ///< fraction of the frame period, in [0, 1)
    double mtu_bits = 12000;

    static VideoParams for_resolution(Resolution r, double fps = 60) {
        VideoParams v;
        v.fps = fps;
        v.mean_frame_bits = resolution_load_bps(r) / fps;
        return v;
    }

    double mean_load_bps() const { return mean_frame_bits * fps; }
};

class BatchVideoSource final : public TrafficSource {
public:
    BatchVideoSource(VideoParams params, std::uint64_t seed) : p_(params), rng_(seed) {
        if (!(p_.fps > 0.0)) throw InvalidParameter("fps must be positive");
        if (!(p_.mean_frame_bits > 0.0)) throw InvalidParameter("mean frame size must be positive");
        if (!(p_.frame_size_cv >= 0.0)) throw InvalidParameter("frame size CV must be >= 0");
        if (!(p_.frame_jitter >= 0.0 && p_.frame_jitter < 1.0))
            throw InvalidParameter("frame jitter must lie in [0,1)");
        if (!(p_.mtu_bits > 0.0)) throw InvalidParameter("mtu must be positive");
        start_ = std::uniform_real_distribution<double>(0.0, 1.0 / p_.fps)(rng_);
    }

    std::optional<Arrival> next() override {
        while (pending_.empty()) emit_frame();
        Arrival a = pending_.front();
        pending_.pop_front();
        return a;
    }

private:
    void emit_frame() {
        const double period = 1.0 / p_.fps;
        double t = start_ + static_cast<double>(frame_++) * period;
        if (p_.frame_jitter > 0.0) {
            const double half = 0.5 * p_.frame_jitter * period;
            t += std::uniform_real_distribution<double>(-half, half)(rng_);
        }
        t = std::max(t, last_time_);
        last_time_ = t;
        double bits = p_.mean_frame_bits;
        if (p_.frame_size_cv > 0.0)
            bits = std::normal_distribution<double>(p_.mean_frame_bits, p_.frame_size_cv * p_.mean_frame_bits)(rng_);
        bits = std::max(bits, p_.mtu_bits);
        for (double b : fragment(bits, p_.mtu_bits)) pending_.push_back(Arrival{t, b});
    }

    VideoParams p_;
    std::mt19937_64 rng_;
    double start_ = 0;
    double last_time_ = 0;
    std::uint64_t frame_ = 0;
    std::deque<Arrival> pending_;
};

// ---------------------------------------------------------------------------
// Declarative description
// ---------------------------------------------------------------------------

enum class TrafficKind { poisson, trace, batch_video };

inline std::string to_string(TrafficKind k) {
    switch (k) {
        case TrafficKind::poisson: return "poisson";
        case TrafficKind::trace: return "trace";
        case TrafficKind::batch_video: return "batch-video";
    }
    return "?";
}

inline TrafficKind parse_traffic_kind(const std::string& s) {
    if (s == "poisson") return TrafficKind::poisson;
    if (s == "trace") return TrafficKind::trace;
    if (s == "batch-video" || s == "batch_video" || s == "video") return TrafficKind::batch_video;
    throw ConfigError("unknown traffic kind `" + s + "`");
}

/// Everything needed to build a source for one replication.
struct TrafficSpec {
    TrafficKind kind = TrafficKind::poisson;
    double arrival_rate = 0;  ///< poisson, packets/s
    double packet_bits = 12000;
    std::string trace_path;
    TraceOptions trace;
    VideoParams video;
};

inline std::unique_ptr<TrafficSource> make_source(const TrafficSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case TrafficKind::poisson:
            return std::make_unique<PoissonSource>(spec.arrival_rate, spec.packet_bits, seed);
        case TrafficKind::trace:
            return std::make_unique<TraceSource>(spec.trace_path, spec.trace, seed);
        case TrafficKind::batch_video:
            return std::make_unique<BatchVideoSource>(spec.video, seed);
    }
    throw ConfigError("unsupported traffic kind");
}

}  // namespace mlo::traffic
