#include "capvton/remote_backends.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "capvton/io.hpp"
#include "httplib.h"
#include "json.hpp"

namespace capvton {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void unavailable(const std::string& what) {
  throw Error(ErrorCode::kBackendUnavailable, what);
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string file_ext(const std::string& name) { return name == "pose" ? "json" : "png"; }

class TempDir {
 public:
  TempDir() {
    std::string templ = (fs::temp_directory_path() / "capvton-XXXXXX").string();
    if (!mkdtemp(templ.data())) unavailable("cannot create temp directory");
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

class ProcessTransport final : public Transport {
 public:
  ProcessTransport(std::string command, double timeout_s)
      : command_(std::move(command)), timeout_s_(timeout_s) {
    if (command_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty command template");
  }

  std::string describe() const override { return "process"; }

  std::string invoke(const RemotePayload& payload) override {
    TempDir dir;
    std::map<std::string, std::string> subst;
    for (const auto& [name, bytes] : payload.files) {
      fs::path p = dir.path() / (name + "." + file_ext(name));
      io::write_text_atomic(p, bytes);
      subst[name] = p.string();
    }
    nlohmann::json request = {{"role", payload.role}};
    for (const auto& [name, value] : payload.fields) {
      subst[name] = value;
      request[name] = value;
    }
    const fs::path request_path = dir.path() / "request.json";
    io::write_text_atomic(request_path, request.dump(1));
    const fs::path output = dir.path() / ("output." + payload.output_ext);
    subst["output"] = output.string();
    subst["workdir"] = dir.path().string();
    subst["request"] = request_path.string();

    run(expand(subst));
    if (!fs::exists(output)) unavailable("command produced no output file " + output.string());
    return io::read_text(output);
  }

 private:
  std::string expand(const std::map<std::string, std::string>& subst) const {
    std::string out;
    for (std::size_t i = 0; i < command_.size();) {
      if (command_[i] == '{') {
        auto close = command_.find('}', i);
        if (close != std::string::npos) {
          auto key = command_.substr(i + 1, close - i - 1);
          if (auto it = subst.find(key); it != subst.end()) {
            out += shell_quote(it->second);
            i = close + 1;
            continue;
          }
        }
      }
      out += command_[i++];
    }
    return out;
  }

  void run(const std::string& cmd) const {
    const pid_t pid = fork();
    if (pid < 0) unavailable("fork failed");
    if (pid == 0) {
      setpgid(0, 0);
      execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(timeout_s_);
    int status = 0;
    for (;;) {
      const pid_t r = waitpid(pid, &status, WNOHANG);
      if (r == pid) break;
      if (r < 0) unavailable("waitpid failed");
      if (std::chrono::steady_clock::now() > deadline) {
        kill(-pid, SIGKILL);
        kill(pid, SIGKILL);
        waitpid(pid, &status, 0);
        unavailable("command timed out after " + std::to_string(timeout_s_) + " s");
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      unavailable("command failed with status " +
                  std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
    }
  }

  std::string command_;
  double timeout_s_;
};

class HttpTransport final : public Transport {
 public:
  HttpTransport(std::string url, double timeout_s) : url_(std::move(url)), timeout_s_(timeout_s) {
    const auto scheme = url_.find("://");
    if (scheme == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "backend URL needs a scheme: " + url_);
    }
    const auto slash = url_.find('/', scheme + 3);
    base_ = url_.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url_.substr(slash);
  }

  std::string describe() const override { return url_; }

  std::string invoke(const RemotePayload& payload) override {
    httplib::Client client(base_);
    const auto secs = static_cast<time_t>(timeout_s_);
    const auto usecs = static_cast<time_t>((timeout_s_ - secs) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::MultipartFormDataItems items;
    for (const auto& [name, bytes] : payload.files) {
      const std::string ext = file_ext(name);
      items.push_back({name, bytes, name + "." + ext,
                       ext == "json" ? "application/json" : "image/png"});
    }
    items.push_back({"role", payload.role, "", "text/plain"});
    for (const auto& [name, value] : payload.fields) items.push_back({name, value, "", "text/plain"});
    auto res = client.Post(path_, items);
    if (!res) unavailable("HTTP request to " + url_ + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      unavailable("HTTP " + std::to_string(res->status) + " from " + url_);
    }
    return res->body;
  }

 private:
  std::string url_;
  std::string base_;
  std::string path_;
  double timeout_s_;
};

}  // namespace

std::unique_ptr<Transport> make_process_transport(std::string command_template, double timeout_s) {
  return std::make_unique<ProcessTransport>(std::move(command_template), timeout_s);
}

std::unique_ptr<Transport> make_http_transport(std::string url, double timeout_s) {
  return std::make_unique<HttpTransport>(std::move(url), timeout_s);
}

RemoteParser::RemoteParser(std::unique_ptr<Transport> transport, LabelSchema schema)
    : transport_(std::move(transport)), schema_(std::move(schema)) {}

ParseMap RemoteParser::parse(const RasterImage& img) {
  RemotePayload p{"parser", {{"image", io::encode_png(img)}}, {}, "png"};
  return io::decode_parse(transport_->invoke(p), schema_);
}

PoseSkeleton RemotePose::estimate(const RasterImage& img) {
  RemotePayload p{"pose", {{"image", io::encode_png(img)}}, {}, "json"};
  return io::parse_pose_json(transport_->invoke(p));
}

RasterImage RemoteInpainter::inpaint(const InpaintRequest& r) {
  RemotePayload p{"inpainter",
                  {{"image", io::encode_png(r.image)},
                   {"mask", io::encode_mask_png(r.mask)},
                   {"pose", io::format_pose_json(r.pose)}},
                  {{"prompt", r.prompt},
                   {"steps", std::to_string(r.steps)},
                   {"seed", std::to_string(r.seed)}},
                  "png"};
  return io::decode_image(transport_->invoke(p));
}

RasterImage RemoteTryOn::synthesize(const TryOnRequest& r) {
  RemotePayload p{"tryon",
                  {{"image", io::encode_png(r.person)},
                   {"garment", io::encode_png(r.garment)},
                   {"mask", io::encode_mask_png(r.mask)},
                   {"pose", io::format_pose_json(r.pose)}},
                  {{"category", std::string(to_string(r.category))},
                   {"seed", std::to_string(r.seed)}},
                  "png"};
  return io::decode_image(transport_->invoke(p));
}

}  // namespace capvton
