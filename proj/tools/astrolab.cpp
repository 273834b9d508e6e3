#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "astrolab/astrolab.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// --calib/--params beat ASTROLAB_CONFIG_DIR; with neither, built-in
/// defaults apply.
fs::path config_fallback(const std::string& flag, const char* filename) {
  if (!flag.empty()) return flag;
  if (const char* dir = std::getenv("ASTROLAB_CONFIG_DIR")) {
    const fs::path candidate = fs::path(dir) / filename;
    if (fs::exists(candidate)) return candidate;
  }
  return {};
}

struct RunArgs {
  std::string plan;
  std::string site;
  std::string calib;
  std::string params;
  std::string log_dir = "logs";
  std::string telemetry;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_run(const RunArgs& args) {
  using namespace astrolab;
  try {
    MissionPlan plan = parse_plan(read_file(args.plan));
    if (args.seed_set) plan.seed = args.seed;

    fs::path site_path = args.site;
    if (site_path.empty()) {
      if (plan.site_ref.empty())
        throw std::runtime_error(
            "no site: pass --site or set `site =` in the plan");
      site_path = fs::path(plan.site_ref);
      if (site_path.is_relative())
        site_path = fs::path(args.plan).parent_path() / site_path;
    }
    const SiteModel site =
        load_site(read_file(site_path), site_path.stem().string());

    SensorCalibration calib;
    const fs::path calib_path = config_fallback(args.calib, "calibration.cfg");
    if (!calib_path.empty()) calib = load_calibration(read_file(calib_path));

    AssayProtocol protocol = default_protocol();
    BaselineClassifierConfig classifier_cfg;
    EngineParams engine_params;
    const fs::path params_path = config_fallback(args.params, "protocol.cfg");
    if (!params_path.empty()) {
      const std::string text = read_file(params_path);
      validate_params_sections(text);
      protocol = load_protocol(text);
      classifier_cfg = load_classifier_config(text);
      engine_params = load_engine_params(text);
    }

    const ClassifierRegistry registry(classifier_cfg);
    if (!registry.has(plan.classifier_id))
      throw std::runtime_error("classifier `" + plan.classifier_id +
                               "` is not registered");

    std::unique_ptr<TelemetryClient> client;
    std::string endpoint = args.telemetry;
    if (endpoint.empty() && plan.telemetry) endpoint = *plan.telemetry;
    if (!endpoint.empty()) {
      const Endpoint ep = parse_endpoint(endpoint);
      client = std::make_unique<TelemetryClient>(ep.host, ep.port);
    }

    const MissionResult result = run_mission(
        plan, site, calib, protocol, registry, engine_params, client.get());

    fs::create_directories(args.log_dir);
    const fs::path log_path = fs::path(args.log_dir) / "mission.log";
    {
      std::ofstream out(log_path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + log_path.string());
      out << result.log.to_text();
    }
    if (client) client->close();

    std::cout << "log path=" << log_path.string() << "\n"
              << result.summary.to_text() << std::flush;
    return result.status == astrolab::MissionStatus::Aborted ? kExitAborted
                                                             : kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "astrolab run: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_replay(const std::string& log_dir) {
  try {
    const fs::path log_path = fs::path(log_dir) / "mission.log";
    const astrolab::MissionSummary summary =
        astrolab::replay(read_file(log_path));
    std::cout << summary.to_text() << std::flush;
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "astrolab report: " << e.what() << "\n";
    return kExitConfig;
  }
}

std::atomic<bool> g_stop{false};

void handle_stop(int) { g_stop = true; }

int cmd_groundstation(const std::string& listen, const std::string& store) {
  using namespace astrolab;
  try {
    const Endpoint ep = parse_endpoint(listen);
    GroundStation station({ep.host, ep.port, store});
    station.start();
    std::cout << "listening host=" << ep.host << " port=" << station.port()
              << " store=" << store << "\n"
              << std::flush;
    std::signal(SIGINT, handle_stop);
    std::signal(SIGTERM, handle_stop);
    while (!g_stop)
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    station.stop();
    std::cout << "stopped connections=" << station.connections()
              << " stored=" << station.stored()
              << " rejected=" << station.rejected() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "astrolab groundstation: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  CLI::App app{"desk-scale rover soil/rock analysis simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "execute a mission plan");
  run->add_option("--plan", run_args.plan, "mission plan file")->required();
  run->add_option("--site", run_args.site, "site spec file");
  run->add_option("--calib", run_args.calib, "sensor calibration file");
  run->add_option("--params", run_args.params, "assay/engine params file");
  run->add_option("--log", run_args.log_dir, "log output directory");
  run->add_option("--telemetry", run_args.telemetry,
                  "ground station host:port");
  run->add_option("--seed", run_args.seed, "override the plan seed")
      ->each([&](const std::string&) { run_args.seed_set = true; });

  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "summarize a mission log");
  report->add_option("--log", report_dir, "log directory")->required();

  std::string replay_dir;
  CLI::App* replay_cmd =
      app.add_subcommand("replay", "recompute a summary from a log");
  replay_cmd->add_option("--log", replay_dir, "log directory")->required();

  std::string listen, store;
  CLI::App* station =
      app.add_subcommand("groundstation", "run the telemetry receiver");
  station->add_option("--listen", listen, "host:port to bind")->required();
  station->add_option("--store", store, "store directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) return cmd_run(run_args);
  if (report->parsed()) return cmd_replay(report_dir);
  if (replay_cmd->parsed()) return cmd_replay(replay_dir);
  if (station->parsed()) return cmd_groundstation(listen, store);
  return kExitConfig;
}
