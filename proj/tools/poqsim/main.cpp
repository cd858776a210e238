#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "poq/errors.hpp"
#include "poq/runner.hpp"
#include "poq/transport.hpp"

namespace {

using poq::ExitCode;
using poq::runner::RunConfig;

struct Options {
  RunConfig cfg;
  std::string protocol = "poq1";
  std::string mode = "accelerated";
  std::string transport = "inproc";
  std::string bset;
  std::string transcripts;
  std::string report;
};

void add_config_options(CLI::App* app, Options& o) {
  app->add_option("--protocol", o.protocol, "poq1 | clawgen | poq2 | raz | ih-diag");
  app->add_option("--n", o.cfg.n, "dimension for poq1 and raz");
  app->add_option("--rounds", o.cfg.rounds, "raz rows (default 2n)");
  app->add_option("--lambda", o.cfg.lambda, "one-bit claws to stitch");
  app->add_option("--k", o.cfg.k, "stream length (power of two)");
  app->add_option("--m", o.cfg.m, "adversary memory bound in bits");
  app->add_flag("--strict", o.cfg.strict, "enforce the stream-length precondition");
  app->add_option("--budget", o.cfg.attempt_budget, "attempts per one-bit claw (0 = 100 k^2)");
  app->add_option("--mode", o.mode, "rejection | accelerated");
  app->add_option("--adversary", o.cfg.adversary, "honest or an attack name");
  app->add_option("--subset", o.cfg.subset, "stored prefix for the subset attack");
  app->add_option("--trials", o.cfg.trials, "number of trials");
  app->add_option("--seed", o.cfg.seed, "master seed");
  app->add_option("--threads", o.cfg.threads, "worker threads");
  app->add_option("--transcripts", o.transcripts, "write JSONL transcripts here");
  app->add_option("--report", o.report, "write the JSON report here instead of stdout");
}

std::vector<poq::ih::Index> parse_bset(const std::string& text) {
  std::vector<poq::ih::Index> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<poq::ih::Index>(v));
    } catch (const std::exception&) {
      throw poq::ConfigError("bad bset entry: " + item);
    }
  }
  return out;
}

void finish_config(Options& o) {
  o.cfg.protocol = poq::runner::parse_protocol(o.protocol);
  o.cfg.mode = poq::runner::parse_mode(o.mode);
  if (o.transport == "inproc") {
    o.cfg.transport = poq::runner::Transport::kInproc;
  } else if (o.transport == "tcp") {
    o.cfg.transport = poq::runner::Transport::kTcp;
  } else {
    throw poq::ConfigError("unknown transport: " + o.transport);
  }
  if (!o.bset.empty()) o.cfg.bset = parse_bset(o.bset);
  o.cfg.validate();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw poq::ConfigError("cannot open " + path);
  out << text;
}

int emit(const Options& o, const poq::runner::RunOutput& out) {
  if (!o.transcripts.empty()) {
    write_text(o.transcripts, poq::runner::transcripts_jsonl(o.cfg, out.transcripts));
  }
  const std::string json = out.report.to_json() + "\n";
  if (o.report.empty()) {
    std::cout << json;
  } else {
    write_text(o.report, json);
  }
  for (const auto& f : out.report.failures) {
    std::cerr << "trial " << f.trial << ": " << f.message << "\n";
  }
  return static_cast<int>(out.report.exit_code());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"poqsim: proof-of-quantumness protocol simulator"};
  app.require_subcommand(1);

  Options run_opts;
  auto* run = app.add_subcommand("run", "run trials in process or over loopback TCP");
  add_config_options(run, run_opts);
  run->add_option("--transport", run_opts.transport, "inproc | tcp");

  Options serve_opts;
  std::string role;
  std::string listen;
  std::string connect;
  auto* serve = app.add_subcommand("serve", "run one party over TCP, one connection per trial");
  add_config_options(serve, serve_opts);
  serve->add_option("--role", role, "verifier | prover")->required();
  serve->add_option("--listen", listen, "HOST:PORT for the verifier");
  serve->add_option("--connect", connect, "HOST:PORT for the prover");

  Options diag_opts;
  diag_opts.protocol = "ih-diag";
  diag_opts.cfg.trials = 100;
  auto* diag = app.add_subcommand("ih-diag", "interactive hashing checks and adversary value");
  diag->add_option("--k", diag_opts.cfg.k, "domain size (power of two)");
  diag->add_option("--bset", diag_opts.bset, "comma-separated B for the adversary value");
  diag->add_option("--trials", diag_opts.cfg.trials, "hashing runs to check");
  diag->add_option("--seed", diag_opts.cfg.seed, "master seed");
  diag->add_option("--report", diag_opts.report, "write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::kConfig);
  }

  try {
    if (*run) {
      finish_config(run_opts);
      return emit(run_opts, poq::runner::run(run_opts.cfg, !run_opts.transcripts.empty()));
    }
    if (*diag) {
      finish_config(diag_opts);
      return emit(diag_opts, poq::runner::run(diag_opts.cfg));
    }
    serve_opts.transport = "tcp";
    finish_config(serve_opts);
    if (role == "verifier") {
      if (listen.empty()) throw poq::ConfigError("verifier needs --listen");
      poq::transport::Listener listener(poq::transport::parse_endpoint(listen));
      std::cerr << "listening on port " << listener.port() << "\n";
      return emit(serve_opts, poq::transport::serve_verifier(serve_opts.cfg, listener,
                                                             !serve_opts.transcripts.empty()));
    }
    if (role == "prover") {
      if (connect.empty()) throw poq::ConfigError("prover needs --connect");
      serve_opts.transcripts.clear();
      return emit(serve_opts, poq::transport::serve_prover(
                                  serve_opts.cfg, poq::transport::parse_endpoint(connect)));
    }
    throw poq::ConfigError("role must be verifier or prover");
  } catch (const poq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kFailure);
  }
}
