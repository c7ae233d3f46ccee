#include "sentinel/pipeline/monitor.hpp"

#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace sentinel::pipeline {

namespace {

struct Shared {
  std::mutex mutex;
  std::condition_variable work_ready;
  std::condition_variable space_ready;
  std::condition_variable result_ready;
  std::deque<std::pair<std::size_t, chain::DeploymentEvent>> queue;
  std::map<std::size_t, AnalysisReport> results;
  std::size_t produced = 0;
  bool producer_done = false;
  std::size_t capacity = 1;
};

}  // namespace

MonitorSummary run_monitor(Analyzer& analyzer, std::ostream& out, std::ostream& err) {
  const auto& cfg = analyzer.config();
  if (!analyzer.model()) throw ConfigError("monitor needs a model bundle (model = <dir>)");

  MonitorSummary summary;
  std::ofstream alerts(cfg.alerts, std::ios::app | std::ios::binary);
  if (!alerts) throw std::runtime_error("cannot open alert log " + cfg.alerts);
  std::ofstream reports;
  if (!cfg.reports.empty()) {
    reports.open(cfg.reports, std::ios::app | std::ios::binary);
    if (!reports) throw std::runtime_error("cannot open report log " + cfg.reports);
  }

  const std::size_t workers = cfg.effective_workers();
  Shared s;
  s.capacity = 4 * workers;
  std::vector<std::string> gap_messages;

  std::thread producer([&] {
    try {
      chain::MonitorOptions opt;
      opt.from_block = cfg.from_block ? *cfg.from_block : analyzer.client().block_number();
      opt.to_block = cfg.to_block;
      opt.follow = cfg.follow;
      opt.max_retries = cfg.max_retries;
      opt.initial_backoff = std::chrono::milliseconds(cfg.initial_backoff_ms);
      chain::BlockMonitor monitor(analyzer.client(), opt);
      monitor.run([&](const chain::MonitorItem& item) {
        std::unique_lock lock(s.mutex);
        if (item.error) {
          gap_messages.push_back(*item.error);
          return true;
        }
        if (!item.event) return true;
        s.space_ready.wait(lock, [&] { return s.queue.size() < s.capacity; });
        s.queue.emplace_back(s.produced++, *item.event);
        s.work_ready.notify_one();
        return true;
      });
    } catch (const chain::ReplayMiss&) {
      std::lock_guard lock(s.mutex);
      summary.snapshot_exhausted = true;
    } catch (const std::exception& e) {
      std::lock_guard lock(s.mutex);
      summary.producer_error = e.what();
    }
    std::lock_guard lock(s.mutex);
    s.producer_done = true;
    s.work_ready.notify_all();
    s.result_ready.notify_all();
  });

  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (true) {
        std::unique_lock lock(s.mutex);
        s.work_ready.wait(lock, [&] { return !s.queue.empty() || s.producer_done; });
        if (s.queue.empty()) return;
        auto [seq, event] = std::move(s.queue.front());
        s.queue.pop_front();
        s.space_ready.notify_one();
        lock.unlock();
        auto report = analyzer.analyze_event(event);
        lock.lock();
        s.results.emplace(seq, std::move(report));
        s.result_ready.notify_all();
      }
    });

  // Reorder buffer: results are written strictly in production order.
  std::size_t next = 0;
  while (true) {
    std::unique_lock lock(s.mutex);
    s.result_ready.wait(lock, [&] { return s.results.contains(next) || (s.producer_done && next == s.produced); });
    for (; !gap_messages.empty(); gap_messages.erase(gap_messages.begin())) {
      err << "gap: " << gap_messages.front() << "\n";
      ++summary.gaps;
    }
    auto it = s.results.find(next);
    if (it == s.results.end()) break;
    AnalysisReport report = std::move(it->second);
    s.results.erase(it);
    lock.unlock();
    ++next;

    ++summary.events;
    if (report.ok) ++summary.analyzed;
    else {
      ++summary.failed;
      err << "failed: " << report.record.contract_id;
      for (const auto& d : report.diagnostics) err << "; " << d;
      err << "\n";
    }
    if (reports.is_open()) reports << report.to_json().dump() << "\n" << std::flush;
    if (report.adversarial()) {
      ++summary.alerts;
      alerts << report.alert_json().dump() << "\n" << std::flush;
      char p[32];
      std::snprintf(p, sizeof p, "%.4f", report.prediction->p_pred);
      out << "ALERT block " << report.block.value_or(0) << " tx " << report.tx_index.value_or(0) << " contract "
          << report.record.contract_id << " p_pred " << p << "\n" << std::flush;
    }
  }
  producer.join();
  for (auto& t : pool) t.join();
  for (const auto& g : gap_messages) {
    err << "gap: " << g << "\n";
    ++summary.gaps;
  }
  if (summary.producer_error) err << "monitor stopped: " << *summary.producer_error << "\n";
  return summary;
}

}  // namespace sentinel::pipeline
