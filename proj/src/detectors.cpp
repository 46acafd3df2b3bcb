#include "salisa/detectors.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <random>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "salisa/errors.hpp"
#include "salisa/inverse_transform.hpp"
#include "salisa/io/detection_file.hpp"
#include "salisa/io/image_io.hpp"

namespace salisa {

const char* to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::AnnotationPlayback: return "playback";
    case DetectorKind::ExternalCommand: return "external";
    case DetectorKind::Null: return "null";
  }
  return "unknown";
}

void DetectorSpec::validate() const {
  if (!(cost_gflops >= 0.0) || !std::isfinite(cost_gflops)) throw ConfigError("detector cost_gflops must be >= 0");
  if (!(noise.jitter_pct >= 0.0 && noise.jitter_pct < 50.0)) throw ConfigError("jitter_pct must lie in [0,50)");
  if (!(noise.drop_rate >= 0.0 && noise.drop_rate <= 1.0)) throw ConfigError("drop_rate must lie in [0,1]");
  if (!(timeout_s > 0.0)) throw ConfigError("timeout_s must be positive");
  if (kind != DetectorKind::Null && source.empty()) throw ConfigError("detector '" + name + "' needs a source");
}

std::optional<double> known_cost_gflops(const std::string& name) {
  static const std::map<std::string, double> table = {
      {"efficientdet-d0", 1.36}, {"efficientdet-d1", 3.20}, {"efficientdet-d2", 5.9},
      {"efficientdet-d3", 13.4}, {"salisa-sampler", 0.06},
  };
  if (const auto it = table.find(name); it != table.end()) return it->second;
  return std::nullopt;
}

namespace {

// Uniform double in [0,1) from the top 53 bits, independent of the standard
// library's distribution implementation.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<Detection> playback_detector(const std::map<int, std::vector<Detection>>& annotations, int frame_index,
                                         const PlaybackNoise& noise, std::uint64_t seed) {
  const auto it = annotations.find(frame_index);
  if (it == annotations.end()) return {};
  if (noise.jitter_pct == 0.0 && noise.drop_rate == 0.0) return it->second;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(frame_index)};
  std::mt19937_64 rng(seq);
  const double j = noise.jitter_pct / 100.0;
  std::vector<Detection> out;
  out.reserve(it->second.size());
  for (Detection d : it->second) {
    const bool drop = unit(rng) < noise.drop_rate;
    const double w = d.box.width();
    const double h = d.box.height();
    d.box.x_min += (2.0 * unit(rng) - 1.0) * j * w;
    d.box.x_max += (2.0 * unit(rng) - 1.0) * j * w;
    d.box.y_min += (2.0 * unit(rng) - 1.0) * j * h;
    d.box.y_max += (2.0 * unit(rng) - 1.0) * j * h;
    if (!drop && is_valid(d)) out.push_back(d);
  }
  return out;
}

PlaybackDetector::PlaybackDetector(std::map<int, std::vector<Detection>> annotations, PlaybackNoise noise,
                                   std::uint64_t seed)
    : annotations_(std::move(annotations)), noise_(noise), seed_(seed) {}

std::vector<Detection> PlaybackDetector::detect(const DetectorRequest& request) {
  auto dets = playback_detector(annotations_, request.frame_index, noise_, seed_);
  if (!request.grid) return dets;
  return forward_detections(dets, *request.grid, request.original).detections;
}

std::vector<std::string> expand_argv(const std::string& argv_template, const std::string& input) {
  std::vector<std::string> args;
  std::string cur;
  bool quoted = false;
  bool has_token = false;
  for (char c : argv_template) {
    if (c == '"') {
      quoted = !quoted;
      has_token = true;
    } else if (!quoted && std::isspace(static_cast<unsigned char>(c))) {
      if (has_token) args.push_back(std::move(cur));
      cur.clear();
      has_token = false;
    } else {
      cur.push_back(c);
      has_token = true;
    }
  }
  if (quoted) throw ConfigError("unbalanced quote in command template");
  if (has_token) args.push_back(std::move(cur));
  if (args.empty()) throw ConfigError("empty command template");
  for (auto& a : args) {
    for (std::size_t pos = a.find("{input}"); pos != std::string::npos; pos = a.find("{input}", pos + input.size())) {
      a.replace(pos, 7, input);
    }
  }
  return args;
}

namespace {

struct ChildOutput {
  std::string out;
  std::string err;
  int status = 0;
};

ChildOutput run_child(const std::vector<std::string>& args, std::chrono::milliseconds timeout) {
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) throw DetectorError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    throw DetectorError(std::string("pipe: ") + std::strerror(errno));
  }
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw DetectorError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    ::execvp(argv[0], argv.data());
    _exit(127);
  }
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  ChildOutput result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  std::string* sinks[2] = {&result.out, &result.err};
  int open = 2;
  bool timed_out = false;
  char buf[4096];
  while (open > 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    const int ready = ::poll(fds, 2, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready < 0) break;
    for (int k = 0; k < 2; ++k) {
      if (fds[k].fd < 0 || !(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const ssize_t n = ::read(fds[k].fd, buf, sizeof(buf));
      if (n > 0) {
        sinks[k]->append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        ::close(fds[k].fd);
        fds[k].fd = -1;
        --open;
      }
    }
  }
  for (auto& f : fds) {
    if (f.fd >= 0) ::close(f.fd);
  }
  if (timed_out) ::kill(pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timed_out) {
    throw DetectorError("timeout after " + std::to_string(timeout.count()) + " ms running '" + args[0] + "'");
  }
  result.status = status;
  return result;
}

}  // namespace

std::vector<Detection> external_detector(const std::string& argv_template, const std::filesystem::path& image_path,
                                         std::chrono::milliseconds timeout) {
  const auto args = expand_argv(argv_template, image_path.string());
  const ChildOutput child = run_child(args, timeout);
  if (!WIFEXITED(child.status) || WEXITSTATUS(child.status) != 0) {
    const int code = WIFEXITED(child.status) ? WEXITSTATUS(child.status) : -1;
    throw DetectorError("'" + args[0] + "' exited with status " + std::to_string(code) + ": " + child.err);
  }
  try {
    return io::parse_detection_file(child.out, false).all_detections();
  } catch (const FormatError& e) {
    throw DetectorError("'" + args[0] + "' produced unparsable output: " + e.what());
  }
}

ExternalDetector::ExternalDetector(std::string argv_template, std::chrono::milliseconds timeout,
                                   std::filesystem::path scratch_dir)
    : argv_template_(std::move(argv_template)), timeout_(timeout), scratch_dir_(std::move(scratch_dir)) {}

std::vector<Detection> ExternalDetector::detect(const DetectorRequest& request) {
  const auto path = scratch_dir_ / ("salisa_frame_" + std::to_string(::getpid()) + "_" +
                                    std::to_string(request.frame_index) +
                                    (request.frame.channels() == 3 ? ".ppm" : ".pgm"));
  std::filesystem::create_directories(scratch_dir_);
  io::write_image(path, request.frame);
  std::vector<Detection> dets;
  try {
    dets = external_detector(argv_template_, path, timeout_);
  } catch (...) {
    std::filesystem::remove(path);
    throw;
  }
  std::filesystem::remove(path);
  const CoordinateSpace space =
      request.grid ? CoordinateSpace::resampled(grid_fingerprint(*request.grid)) : CoordinateSpace::original();
  for (auto& d : dets) d.space = space;
  return dets;
}

std::unique_ptr<Detector> make_detector(const DetectorSpec& spec, std::uint64_t seed,
                                        const std::filesystem::path& base_dir,
                                        const std::filesystem::path& scratch_dir) {
  spec.validate();
  switch (spec.kind) {
    case DetectorKind::AnnotationPlayback: {
      const auto file = io::read_detection_file(base_dir / spec.source);
      return std::make_unique<PlaybackDetector>(io::detections_by_frame(file), spec.noise, seed);
    }
    case DetectorKind::ExternalCommand:
      return std::make_unique<ExternalDetector>(
          spec.source, std::chrono::milliseconds(static_cast<long long>(spec.timeout_s * 1000.0)), scratch_dir);
    case DetectorKind::Null: break;
  }
  return std::make_unique<NullDetector>();
}

}  // namespace salisa
