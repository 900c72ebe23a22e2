#include <httplib.h>

#include "dynassign/service.hpp"

namespace dynassign {

struct HttpServer::Impl {
  explicit Impl(ServiceApi& api) : api(api) {}

  ServiceApi& api;
  httplib::Server server;
};

HttpServer::HttpServer(ServiceApi& api) : impl_(std::make_unique<Impl>(api)) {
  auto handle = [this](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse out = impl_->api.Handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  auto& server = impl_->server;
  server.Get(".*", handle);
  server.Post(".*", handle);
  // The operator console may be served from another origin.
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::Listen() { return impl_->server.listen_after_bind(); }

void HttpServer::Stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace dynassign
