#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "skeladv/harness.hpp"

namespace skeladv {

struct VictimServer::Impl {
  GraphConvClassifier model;
  const Topology& topo;
  long limit;
  httplib::Server server;
  std::thread thread;
  mutable std::mutex mu;
  std::map<std::string, long> counts;
  long total = 0;

  Impl(GraphConvClassifier m, const Topology& t, long l) : model(std::move(m)), topo(t), limit(l) { routes(); }

  static void reply_error(httplib::Response& res, int status, const std::string& reason) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", reason}}.dump(), "application/json");
  }

  void routes() {
    server.Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string session = req.has_header("X-Session") ? req.get_header_value("X-Session") : "default";
      long n;
      {
        std::lock_guard<std::mutex> lock(mu);
        n = ++counts[session];
        ++total;
      }
      if (limit > 0 && n > limit) {
        reply_error(res, 429, "query limit of " + std::to_string(limit) + " exceeded for session '" + session + "'");
        return;
      }
      try {
        const Motion m = motion_from_json(req.body);
        check_conforms(m, topo);
        if (m.dims() != model.config().in_dims) throw FormatError("motion has wrong coordinate dimension");
        res.set_content(nlohmann::json{{"label", predict(model, m.coords())}}.dump(), "application/json");
      } catch (const std::exception& e) {
        reply_error(res, 400, e.what());
      }
    });
    server.Get("/stats", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mu);
      nlohmann::json doc{{"total", total}, {"sessions", counts}};
      if (req.has_param("session")) {
        const auto it = counts.find(req.get_param_value("session"));
        doc["queries"] = it == counts.end() ? 0L : it->second;
      }
      res.set_content(doc.dump(), "application/json");
    });
  }
};

VictimServer::VictimServer(GraphConvClassifier model, const Topology& topo, long query_limit)
    : impl_(std::make_unique<Impl>(std::move(model), topo, query_limit)) {}

VictimServer::~VictimServer() { stop(); }

int VictimServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error("cannot bind victim server to " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void VictimServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw Error("cannot serve on " + host + ":" + std::to_string(port));
}

void VictimServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

long VictimServer::session_count(const std::string& session) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  const auto it = impl_->counts.find(session);
  return it == impl_->counts.end() ? 0 : it->second;
}

long VictimServer::total_count() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->total;
}

struct RemoteOracle::Impl {
  httplib::Client client;
  std::string topology;
  std::string session;
  std::string url;
  Impl(const std::string& u, std::string t, std::string s)
      : client(u), topology(std::move(t)), session(std::move(s)), url(u) {
    client.set_keep_alive(true);
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
  }
};

RemoteOracle::RemoteOracle(const std::string& url, std::string topology, std::string session)
    : impl_(std::make_unique<Impl>(url, std::move(topology), std::move(session))) {
  if (!impl_->client.is_valid()) throw Error("invalid victim url '" + url + "'");
}

RemoteOracle::~RemoteOracle() = default;

int RemoteOracle::classify(const Tensor3& x) {
  const std::string body = motion_to_json(Motion(x, impl_->topology));
  const httplib::Headers headers{{"X-Session", impl_->session}};
  auto res = impl_->client.Post("/classify", headers, body, "application/json");
  if (!res) throw Error("victim unreachable at " + impl_->url + ": " + httplib::to_string(res.error()));
  if (res->status == 429) throw Error("victim query limit exceeded");
  if (res->status != 200) throw Error("victim rejected query (" + std::to_string(res->status) + "): " + res->body);
  try {
    return nlohmann::json::parse(res->body).at("label").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed victim response: " + std::string(e.what()));
  }
}

long RemoteOracle::server_count() {
  auto res = impl_->client.Get("/stats?session=" + impl_->session);
  if (!res || res->status != 200) throw Error("victim stats unavailable at " + impl_->url);
  return nlohmann::json::parse(res->body).at("queries").get<long>();
}

}  // namespace skeladv
