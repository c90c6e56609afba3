#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <iomanip>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mlo/errors.hpp"
#include "mlo/phy_timing.hpp"
#include "mlo/queueing.hpp"
#include "mlo/solver.hpp"
#include "mlo/stats.hpp"
#include "mlo/traffic.hpp"

namespace mlo::sim {

enum class SimMode {
    protocol,    ///< STR MLMR backoff instances, RTS/CTS exchanges, OBSS contenders
    pure_queue,  ///< M/M/S with exponential service of mean E[Ds]
};

/// Externally imposed channel occupancy on one link (hand-built scenarios).
struct BusyPeriod {
    int link = 0;
    double start = 0;
    double end = 0;
};

struct SimConfig {
    std::uint64_t seed = 1;
    double duration = 60;  ///< seconds
    double warmup = -1;    ///< seconds; negative selects 10% of duration
    SimMode mode = SimMode::protocol;
    /// A packet arriving to an idle interface may transmit at the next slot
    /// boundary instead of after a full backoff.
    bool immediate_access = false;
    /// pure_queue: mean service time; 0 takes E[Ds] from the analytic model.
    double mean_service = 0;
    bool record_trace = false;
    bool check_invariants = false;
    std::vector<BusyPeriod> scripted_busy;
    /// Consumed in order by AP backoff draws before falling back to the RNG.
    std::vector<int> scripted_backoffs;
    std::uint64_t max_events = 4'000'000'000ULL;
    int stability_samples = 1000;

    double effective_warmup() const { return warmup < 0 ? 0.1 * duration : warmup; }

    void validate() const {
        if (!(duration > 0.0)) throw ConfigError("simulation duration must be positive");
        const double w = effective_warmup();
        if (!(w >= 0.0 && w < duration)) throw ConfigError("warmup must satisfy 0 <= warmup < duration");
        if (stability_samples < 10) throw ConfigError("stability_samples must be >= 10");
        if (mode == SimMode::pure_queue && mean_service < 0) throw ConfigError("mean_service must be >= 0");
    }
};

struct SimReport {
    std::vector<double> delay_samples;  ///< seconds, arrival after warmup
    double p50 = std::numeric_limits<double>::quiet_NaN();
    double p95 = std::numeric_limits<double>::quiet_NaN();
    double p99 = std::numeric_limits<double>::quiet_NaN();
    double mean_delay = std::numeric_limits<double>::quiet_NaN();
    double throughput_bps = 0;
    double offered_load_bps = 0;

    std::uint64_t arrivals = 0;
    std::uint64_t departures = 0;
    std::uint64_t queued_at_end = 0;      ///< waiting in the buffer
    std::uint64_t in_service_at_end = 0;  ///< allocated to an interface
    std::uint64_t measured_arrivals = 0;
    std::uint64_t measured_queued = 0;  ///< found >= S packets in the system
    double queued_fraction = 0;

    std::uint64_t ap_attempts = 0;
    std::uint64_t collisions = 0;
    std::vector<std::uint64_t> retries_histogram;  ///< index = retries; last bin open
    std::uint64_t max_queue = 0;
    bool stable = true;
    double queue_slope = 0;  ///< packets/s over the final 20% of the run

    std::uint64_t contender_attempts = 0;
    std::uint64_t contender_opportunities = 0;  ///< virtual slots x contenders
    std::uint64_t events = 0;
    std::vector<std::string> trace;

    double contender_tau() const {
        return contender_opportunities ? static_cast<double>(contender_attempts) / contender_opportunities : 0.0;
    }
    double ap_collision_rate() const {
        return ap_attempts ? static_cast<double>(collisions) / ap_attempts : 0.0;
    }
};

inline constexpr std::size_t kRetryBins = 16;

namespace detail {

inline void finalize_statistics(SimReport& r) {
    if (!r.delay_samples.empty()) {
        std::vector<double> sorted = r.delay_samples;
        std::sort(sorted.begin(), sorted.end());
        r.p50 = percentile_sorted(sorted, 0.50);
        r.p95 = percentile_sorted(sorted, 0.95);
        r.p99 = percentile_sorted(sorted, 0.99);
        double sum = 0;
        for (double d : sorted) sum += d;
        r.mean_delay = sum / static_cast<double>(sorted.size());
    }
    r.queued_fraction =
        r.measured_arrivals ? static_cast<double>(r.measured_queued) / r.measured_arrivals : 0.0;
}

/// Least-squares trend of the number in system over the final 20% of the run.
/// Unstable when the trend exceeds max(0.5% of the arrival rate, 1 pkt/s) and
/// amounts to more than 20 packets over the window.
inline void stability_verdict(SimReport& r, const std::vector<double>& ts, const std::vector<double>& qs,
                              double arrival_rate) {
    if (ts.size() < 10) return;
    const std::size_t from = ts.size() - ts.size() / 5;
    std::span<const double> x(ts.data() + from, ts.size() - from);
    std::span<const double> y(qs.data() + from, qs.size() - from);
    r.queue_slope = ols_slope(x, y);
    const double window = x.back() - x.front();
    const double eps = std::max(0.005 * arrival_rate, 1.0);
    r.stable = !(r.queue_slope > eps && r.queue_slope * window > 20.0);
}

enum class EventKind : int { busy_end = 0, script_busy = 1, arrival = 2, attempt = 3 };

struct Event {
    double time;
    EventKind kind;
    int link;
    std::uint64_t seq;
    std::uint64_t epoch;
    double end;  // script_busy only

    bool operator>(const Event& o) const {
        if (time != o.time) return time > o.time;
        if (kind != o.kind) return static_cast<int>(kind) > static_cast<int>(o.kind);
        if (link != o.link) return link > o.link;
        return seq > o.seq;
    }
};

struct Contender {
    int counter = 0;
    int stage = 0;
};

struct ApInstance {
    std::uint64_t packet = 0;
    int counter = 0;
    int stage = 0;
};

struct Link {
    int id = 0;
    std::vector<Contender> contenders;
    std::optional<ApInstance> ap;
    std::optional<std::uint64_t> allocated;
    bool busy = false;
    bool scripted = false;
    double busy_until = 0;
    double anchor = 0;  // slot boundary at which the counters are current
    std::uint64_t epoch = 0;
    std::vector<std::size_t> tx_contenders;
    bool ap_tx = false;
    double tx_bits = 0;
};

struct Packet {
    std::uint64_t id = 0;
    double arrival = 0;
    double bits = 0;
    double service_start = -1;
    int retries = 0;
};

class ProtocolSimulator {
public:
    ProtocolSimulator(const Scenario& sc, const PhyMacParams& params, traffic::TrafficSource& source,
                      const SimConfig& cfg)
        : sc_(sc), params_(params), air_(compute_air_times(params)), source_(source), cfg_(cfg), rng_(cfg.seed),
          scripted_draws_(cfg.scripted_backoffs.begin(), cfg.scripted_backoffs.end()) {
        warmup_ = cfg.effective_warmup();
        links_.resize(static_cast<std::size_t>(sc.n_interfaces));
        const int contenders = sc.activity > 0.0 ? sc.n_contenders : 0;
        for (int l = 0; l < sc.n_interfaces; ++l) {
            Link& link = links_[static_cast<std::size_t>(l)];
            link.id = l;
            link.contenders.resize(static_cast<std::size_t>(contenders));
            for (auto& c : link.contenders) c.counter = draw_window(0);
        }
        report_.retries_histogram.assign(kRetryBins, 0);
    }

    SimReport run() {
        for (const BusyPeriod& b : cfg_.scripted_busy) {
            if (b.link < 0 || b.link >= sc_.n_interfaces || !(b.end > b.start) || b.start < 0)
                throw ConfigError("invalid scripted busy period");
            push(Event{b.start, EventKind::script_busy, b.link, 0, 0, b.end});
        }
        for (auto& link : links_) plan(link);
        schedule_next_arrival();

        const double sample_dt = cfg_.duration / cfg_.stability_samples;
        double next_sample = sample_dt;
        std::vector<double> sample_t, sample_q;

        while (!events_.empty()) {
            const Event ev = events_.top();
            if (ev.time > cfg_.duration) break;
            events_.pop();
            while (next_sample <= ev.time) {
                sample_t.push_back(next_sample);
                sample_q.push_back(static_cast<double>(in_system()));
                next_sample += sample_dt;
            }
            if (++report_.events > cfg_.max_events) throw SimulationError("event cap exceeded");
            dispatch(ev);
            if (cfg_.check_invariants) check_invariants();
        }
        while (next_sample <= cfg_.duration + 1e-12) {
            sample_t.push_back(next_sample);
            sample_q.push_back(static_cast<double>(in_system()));
            next_sample += sample_dt;
        }

        report_.queued_at_end = buffer_.size();
        report_.in_service_at_end = allocated_count();
        const double span = cfg_.duration - warmup_;
        report_.throughput_bps = delivered_bits_ / span;
        report_.offered_load_bps = offered_bits_ / span;
        finalize_statistics(report_);
        stability_verdict(report_, sample_t, sample_q, static_cast<double>(report_.arrivals) / cfg_.duration);
        return std::move(report_);
    }

private:
    // -- event plumbing ----------------------------------------------------

    void push(Event e) {
        e.seq = seq_++;
        events_.push(e);
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::arrival: on_arrival(ev.time); break;
            case EventKind::attempt: {
                Link& link = links_[static_cast<std::size_t>(ev.link)];
                if (ev.epoch == link.epoch && !link.busy) on_boundary(link, ev.time);
                break;
            }
            case EventKind::busy_end: on_busy_end(links_[static_cast<std::size_t>(ev.link)], ev.time); break;
            case EventKind::script_busy: on_script_busy(links_[static_cast<std::size_t>(ev.link)], ev); break;
        }
    }

    void schedule_next_arrival() {
        if (auto a = source_.next()) {
            if (a->time < last_arrival_time_) throw SimulationError("traffic source went back in time");
            last_arrival_time_ = a->time;
            pending_arrival_ = *a;
            push(Event{a->time, EventKind::arrival, -1, 0, 0, 0});
        }
    }

    // -- trace ---------------------------------------------------------------

    void log(double t, int link, const char* what, std::optional<std::uint64_t> pkt, std::optional<int> value = {}) {
        if (!cfg_.record_trace) return;
        std::ostringstream os;
        os << std::fixed << std::setprecision(3) << t * 1e6 << "us ";
        if (link >= 0)
            os << "link=" << link + 1;
        else
            os << "link=-";
        os << ' ' << what;
        if (pkt) os << " pkt=" << *pkt;
        if (value) os << " value=" << *value;
        report_.trace.push_back(os.str());
    }

    // -- backoff draws -------------------------------------------------------

    int window(int stage) const { return (params_.cw_min + 1) << stage; }

    int draw_window(int stage) { return std::uniform_int_distribution<int>(0, window(stage) - 1)(rng_); }

    int draw_ap(int stage) {
        if (!scripted_draws_.empty()) {
            const int v = scripted_draws_.front();
            scripted_draws_.pop_front();
            return v;
        }
        return draw_window(stage);
    }

    // -- per-link slot lattice ----------------------------------------------

    std::optional<int> min_counter(const Link& link) const {
        std::optional<int> m;
        for (const auto& c : link.contenders) m = m ? std::min(*m, c.counter) : c.counter;
        if (link.ap) m = m ? std::min(*m, link.ap->counter) : link.ap->counter;
        return m;
    }

    void shift(Link& link, std::int64_t slots) {
        if (slots <= 0) return;
        for (auto& c : link.contenders) c.counter -= static_cast<int>(slots);
        if (link.ap) link.ap->counter -= static_cast<int>(slots);
        link.anchor += static_cast<double>(slots) * params_.sigma;
        report_.contender_opportunities += static_cast<std::uint64_t>(slots) * link.contenders.size();
    }

    /// Moves an idle link's anchor to the first boundary at or after t.
    void rebase_up(Link& link, double t) {
        if (link.busy) return;
        const auto m = min_counter(link);
        if (!m) {
            // nobody is counting down, so the slot grid restarts here
            link.anchor = std::max(link.anchor, t);
            return;
        }
        auto j = static_cast<std::int64_t>(std::ceil((t - link.anchor) / params_.sigma - 1e-9));
        shift(link, std::min<std::int64_t>(j, *m));
    }

    /// Moves an idle link's anchor to the last boundary at or before t.
    void rebase_down(Link& link, double t) {
        if (link.busy) return;
        auto j = static_cast<std::int64_t>(std::floor((t - link.anchor) / params_.sigma + 1e-9));
        if (auto m = min_counter(link)) j = std::min<std::int64_t>(j, *m);
        shift(link, j);
    }

    void plan(Link& link) {
        ++link.epoch;
        if (link.busy) return;
        if (auto m = min_counter(link))
            push(Event{link.anchor + *m * params_.sigma, EventKind::attempt, link.id, 0, link.epoch, 0});
    }

    /// Slot boundary where at least one counter reached zero.
    void on_boundary(Link& link, double t) {
        rebase_up(link, t);
        link.tx_contenders.clear();
        link.ap_tx = false;
        std::bernoulli_distribution transmits(sc_.activity);
        for (std::size_t i = 0; i < link.contenders.size(); ++i) {
            Contender& c = link.contenders[i];
            if (c.counter != 0) continue;
            if (transmits(rng_)) {
                link.tx_contenders.push_back(i);
            } else {
                c.counter = draw_window(c.stage) + 1;  // the declined slot still elapses
            }
        }
        report_.contender_attempts += link.tx_contenders.size();
        report_.contender_opportunities += link.contenders.size();

        if (link.ap && link.ap->counter == 0) start_ap_transmission(link, t);

        const std::size_t transmitters = link.tx_contenders.size() + (link.ap_tx ? 1 : 0);
        // one virtual slot elapses for everyone still counting down
        for (std::size_t i = 0; i < link.contenders.size(); ++i) {
            if (std::find(link.tx_contenders.begin(), link.tx_contenders.end(), i) != link.tx_contenders.end())
                continue;
            --link.contenders[i].counter;
        }
        if (link.ap && !link.ap_tx) --link.ap->counter;

        if (transmitters == 0) {
            link.anchor = t + params_.sigma;
            plan(link);
            return;
        }
        double duration;
        if (transmitters > 1) {
            duration = air_.t_c;
        } else if (link.ap_tx) {
            duration = success_time(params_, air_, link.tx_bits);
        } else {
            duration = air_.t_s;
        }
        link.busy = true;
        link.busy_until = t + duration;
        ++link.epoch;
        push(Event{link.busy_until, EventKind::busy_end, link.id, 0, 0, 0});
    }

    void start_ap_transmission(Link& link, double t) {
        const std::uint64_t id = link.ap->packet;
        if (!link.allocated) allocate_head(link, t, "ALLOCATE");
        Packet& pkt = packets_.at(id);
        if (pkt.service_start < 0) pkt.service_start = t;
        link.ap_tx = true;
        link.tx_bits = pkt.bits;
        ++report_.ap_attempts;
        log(t, link.id, "TX", id);
    }

    void on_busy_end(Link& link, double t) {
        link.busy = false;
        link.anchor = t;
        if (link.scripted) {
            link.scripted = false;
            plan(link);
            return;
        }
        const bool collision = link.tx_contenders.size() + (link.ap_tx ? 1 : 0) > 1;
        for (std::size_t i : link.tx_contenders) {
            Contender& c = link.contenders[i];
            c.stage = collision ? std::min(c.stage + 1, params_.m_stages) : 0;
            c.counter = draw_window(c.stage);
        }
        link.tx_contenders.clear();

        if (link.ap_tx) {
            link.ap_tx = false;
            ApInstance& inst = *link.ap;
            Packet& pkt = packets_.at(inst.packet);
            if (collision) {
                ++report_.collisions;
                ++pkt.retries;
                inst.stage = std::min(inst.stage + 1, params_.m_stages);
                inst.counter = draw_ap(inst.stage);
                log(t, link.id, "COLLISION", inst.packet, inst.counter);
            } else {
                depart(pkt, t);
                log(t, link.id, "SUCCESS", inst.packet);
                packets_.erase(inst.packet);
                link.ap.reset();
                link.allocated.reset();
                normalize(t);
            }
        }
        plan(link);
    }

    void on_script_busy(Link& link, const Event& ev) {
        if (link.busy) throw SimulationError("scripted busy period overlaps a transmission");
        rebase_down(link, ev.time);
        link.busy = true;
        link.scripted = true;
        link.busy_until = ev.end;
        ++link.epoch;
        log(ev.time, link.id, "OBSS_BUSY", std::nullopt);
        push(Event{ev.end, EventKind::busy_end, link.id, 0, 0, 0});
    }

    // -- STR MLMR allocation -------------------------------------------------

    std::size_t allocated_count() const {
        std::size_t n = 0;
        for (const auto& l : links_) n += l.allocated ? 1 : 0;
        return n;
    }

    std::size_t in_system() const { return allocated_count() + buffer_.size(); }

    std::size_t instances_of(std::uint64_t id) const {
        std::size_t n = 0;
        for (const auto& l : links_) n += (l.ap && !l.allocated && l.ap->packet == id) ? 1 : 0;
        return n;
    }

    void add_instance(Link& link, std::uint64_t id, double t) {
        rebase_up(link, t);
        const Packet& pkt = packets_.at(id);
        int counter;
        if (cfg_.immediate_access && !link.busy && pkt.arrival == t && scripted_draws_.empty())
            counter = 0;
        else
            counter = draw_ap(0);
        link.ap = ApInstance{id, counter, 0};
        log(t, link.id, "BACKOFF", id, counter);
        plan(link);
    }

    void cancel_instance(Link& link, double t) {
        rebase_up(link, t);
        log(t, link.id, "CANCEL", link.ap->packet);
        link.ap.reset();
        plan(link);
    }

    /// Pins the buffer head to `link`, cancels its other instances and pops it.
    void allocate_head(Link& link, double t, const char* what) {
        const std::uint64_t id = buffer_.front();
        link.allocated = id;
        log(t, link.id, what, id);
        for (auto& other : links_)
            if (other.id != link.id && other.ap && !other.allocated && other.ap->packet == id) cancel_instance(other, t);
        buffer_.pop_front();
    }

    /// Restores the allocation invariant: every interface without an
    /// allocated packet contends for the buffer head, and a head holding
    /// instances is pinned as soon as another packet waits behind it.
    void normalize(double t) {
        while (!buffer_.empty()) {
            const std::uint64_t head = buffer_.front();
            if (buffer_.size() >= 2 && instances_of(head) > 0) {
                pin_to_closest(head, t);
                continue;
            }
            bool granted = false;
            for (auto& link : links_) {
                if (!link.allocated && !link.ap) {
                    add_instance(link, head, t);
                    granted = true;
                }
            }
            if (!(granted && buffer_.size() >= 2)) break;
        }
    }

    /// Keeps the instance with the fewest remaining slots (ties: lowest link).
    void pin_to_closest(std::uint64_t head, double t) {
        Link* best = nullptr;
        for (auto& link : links_) {
            if (!link.ap || link.allocated || link.ap->packet != head) continue;
            rebase_up(link, t);
            if (!best || link.ap->counter < best->ap->counter) best = &link;
        }
        allocate_head(*best, t, "ALLOCATE");
    }

    void on_arrival(double t) {
        const traffic::Arrival a = *pending_arrival_;
        const std::uint64_t id = next_id_++;
        packets_.emplace(id, Packet{id, t, a.bits, -1, 0});
        ++report_.arrivals;
        if (t >= warmup_) {
            ++report_.measured_arrivals;
            offered_bits_ += a.bits;
            if (in_system() >= links_.size()) ++report_.measured_queued;
        }
        log(t, -1, "ARRIVE", id);
        buffer_.push_back(id);
        normalize(t);
        report_.max_queue = std::max<std::uint64_t>(report_.max_queue, buffer_.size());
        schedule_next_arrival();
    }

    void depart(const Packet& pkt, double t) {
        ++report_.departures;
        if (pkt.service_start < pkt.arrival || t < pkt.service_start)
            throw SimulationError("packet timestamps out of order");
        if (t >= warmup_) delivered_bits_ += pkt.bits;
        if (pkt.arrival >= warmup_) {
            report_.delay_samples.push_back(t - pkt.arrival);
            const auto bin = std::min<std::size_t>(static_cast<std::size_t>(pkt.retries), kRetryBins - 1);
            ++report_.retries_histogram[bin];
        }
    }

    void check_invariants() const {
        std::vector<std::uint64_t> transmitting;
        for (const auto& link : links_) {
            if (link.allocated && (!link.ap || link.ap->packet != *link.allocated))
                throw SimulationError("allocated link without its packet's backoff");
            if (link.ap_tx) transmitting.push_back(link.ap->packet);
            if (link.ap && link.ap->counter < 0) throw SimulationError("negative AP backoff counter");
            for (const auto& c : link.contenders)
                if (c.counter < 0) throw SimulationError("negative contender counter");
        }
        std::sort(transmitting.begin(), transmitting.end());
        if (std::adjacent_find(transmitting.begin(), transmitting.end()) != transmitting.end())
            throw SimulationError("packet transmitted on two links at once");
        const std::size_t free_links = links_.size() - allocated_count();
        if (buffer_.empty()) return;
        // s = max(1, S - n): the head holds every interface not allocated
        if (instances_of(buffer_.front()) != free_links)
            throw SimulationError("buffer head does not hold every free interface");
        if (buffer_.size() >= 2 && free_links != 0) throw SimulationError("packets wait while an interface is free");
        for (std::size_t i = 1; i < buffer_.size(); ++i)
            if (instances_of(buffer_[i]) != 0) throw SimulationError("non-head packet holds a backoff instance");
    }

    Scenario sc_;
    PhyMacParams params_;
    AirTimes air_;
    traffic::TrafficSource& source_;
    SimConfig cfg_;
    std::mt19937_64 rng_;
    std::deque<int> scripted_draws_;
    double warmup_ = 0;

    std::vector<Link> links_;
    std::deque<std::uint64_t> buffer_;
    std::unordered_map<std::uint64_t, Packet> packets_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;
    std::uint64_t seq_ = 0;
    std::uint64_t next_id_ = 1;
    std::optional<traffic::Arrival> pending_arrival_;
    double last_arrival_time_ = 0;
    double delivered_bits_ = 0;
    double offered_bits_ = 0;
    SimReport report_;
};

/// FIFO M/M/S: S servers with exponential service times of the given mean.
inline SimReport run_pure_queue(int servers, double mean_service, traffic::TrafficSource& source,
                                const SimConfig& cfg) {
    if (!(mean_service > 0.0)) throw ConfigError("pure-queue mode needs a positive mean service time");
    std::mt19937_64 rng(cfg.seed);
    std::exponential_distribution<double> service(1.0 / mean_service);
    const double warmup = cfg.effective_warmup();

    SimReport r;
    r.retries_histogram.assign(kRetryBins, 0);
    std::priority_queue<double, std::vector<double>, std::greater<double>> completions;
    std::deque<std::pair<double, double>> waiting;  // arrival time, bits
    std::vector<double> sample_t, sample_q;
    const double sample_dt = cfg.duration / cfg.stability_samples;
    double next_sample = sample_dt;
    double delivered = 0, offered = 0;

    auto finish = [&](double start_arrival, double bits, double end) {
        ++r.departures;
        if (end <= cfg.duration) {
            if (end >= warmup) delivered += bits;
            if (start_arrival >= warmup) {
                r.delay_samples.push_back(end - start_arrival);
                ++r.retries_histogram[0];
            }
        }
    };
    // completions carry no packet identity, so service intervals are tracked
    // by pairing each start with its arrival record
    struct InService {
        double end, arrival, bits;
        bool operator>(const InService& o) const { return end > o.end; }
    };
    std::priority_queue<InService, std::vector<InService>, std::greater<InService>> busy;

    auto sample_until = [&](double t) {
        while (next_sample <= t && next_sample <= cfg.duration + 1e-12) {
            sample_t.push_back(next_sample);
            sample_q.push_back(static_cast<double>(busy.size() + waiting.size()));
            next_sample += sample_dt;
        }
    };

    std::optional<traffic::Arrival> next = source.next();
    while (true) {
        const double t_arr = next ? next->time : std::numeric_limits<double>::infinity();
        const double t_dep = busy.empty() ? std::numeric_limits<double>::infinity() : busy.top().end;
        const double t = std::min(t_arr, t_dep);
        if (t > cfg.duration) break;
        sample_until(t);
        if (++r.events > cfg.max_events) throw SimulationError("event cap exceeded");
        if (t_dep <= t_arr) {
            const InService done = busy.top();
            busy.pop();
            finish(done.arrival, done.bits, done.end);
            if (!waiting.empty()) {
                auto [arr, bits] = waiting.front();
                waiting.pop_front();
                busy.push(InService{t + service(rng), arr, bits});
            }
        } else {
            ++r.arrivals;
            if (t >= warmup) {
                ++r.measured_arrivals;
                offered += next->bits;
                if (busy.size() >= static_cast<std::size_t>(servers)) ++r.measured_queued;
            }
            if (busy.size() < static_cast<std::size_t>(servers))
                busy.push(InService{t + service(rng), t, next->bits});
            else
                waiting.emplace_back(t, next->bits);
            r.max_queue = std::max<std::uint64_t>(r.max_queue, waiting.size());
            next = source.next();
        }
    }
    sample_until(cfg.duration);
    (void)completions;

    r.queued_at_end = waiting.size();
    r.in_service_at_end = busy.size();
    const double span = cfg.duration - warmup;
    r.throughput_bps = delivered / span;
    r.offered_load_bps = offered / span;
    finalize_statistics(r);
    stability_verdict(r, sample_t, sample_q, static_cast<double>(r.arrivals) / cfg.duration);
    return r;
}

}  // namespace detail

/// Runs one replication. Identical inputs and seeds give identical reports.
inline SimReport run(const Scenario& scenario, const PhyMacParams& params, traffic::TrafficSource& source,
                     const SimConfig& cfg) {
    scenario.validate();
    params.validate();
    cfg.validate();
    if (cfg.mode == SimMode::pure_queue) {
        double mean = cfg.mean_service;
        if (mean == 0.0) mean = solve_fixed_point(scenario, params).e_service_s;
        return detail::run_pure_queue(scenario.n_interfaces, mean, source, cfg);
    }
    detail::ProtocolSimulator simulator(scenario, params, source, cfg);
    return simulator.run();
}

}  // namespace mlo::sim
