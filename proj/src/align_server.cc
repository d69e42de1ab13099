// Copyright 2026 The bamt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bamt/align_server.h"

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <regex>
#include <shared_mutex>

#include "bamt/align.h"
#include "httplib.h"
#include "json.hpp"

namespace bamt::align {
namespace {

using Json = nlohmann::ordered_json;

struct Entry {
  std::shared_mutex mutex;
  std::unique_ptr<Session> session;
};

HttpResponse Reply(int status, const Json &body) { return {status, body.dump()}; }

HttpResponse Fail(int status, const std::string &message) {
  return Reply(status, Json{{"error", message}});
}

Json Text(const std::optional<SentenceRef> &s) {
  if (!s) return nullptr;
  return Json{{"text", s->text}, {"line", s->line}};
}

Json UnitJson(const AlignedUnit &u) {
  return {{"kind", KindName(u.kind)}, {"bam", Text(u.bam)}, {"fr", Text(u.fr)},
          {"en", Text(u.en)}};
}

Stream StreamFrom(const nlohmann::json &j, const char *name) {
  if (!j.contains(name)) throw InvalidArgument(std::string("missing stream ") + name);
  const auto &v = j.at(name);
  if (v.is_string()) return Stream::FromFile(v.get<std::string>());
  if (v.is_array()) return Stream::FromTexts(v.get<std::vector<std::string>>());
  throw InvalidArgument(std::string("stream ") + name +
                        " must be a file path or a list of texts");
}

}  // namespace

struct AlignServer::Impl {
  ServerOptions options;
  httplib::Server http;
  std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Entry>> sessions;
  std::uint64_t next_id = 1;

  Json State(const std::string &id, const Session &s) const {
    Json cursors, lengths, window;
    for (LanguageTag l : kStreams) {
      const std::string code(LanguageCode(l));
      const std::size_t c = s.cursor(l);
      const Stream &st = s.stream(l);
      cursors[code] = c;
      lengths[code] = st.size();
      Json items = Json::array();
      const std::size_t w = static_cast<std::size_t>(std::max(0, options.window));
      const std::size_t from = c > w ? c - w : 0;
      const std::size_t to = std::min(st.size(), c + w + 1);
      for (std::size_t i = from; i < to; ++i) {
        items.push_back({{"index", i}, {"line", st.lines[i]}, {"text", st.texts[i]},
                         {"current", i == c}});
      }
      window[code] = items;
    }
    return {{"id", id},
            {"version", s.version()},
            {"output", s.output_path()},
            {"cursors", cursors},
            {"lengths", lengths},
            {"aligned", s.aligned().size()},
            {"saved", s.saved_units()},
            {"window", window}};
  }

  std::shared_ptr<Entry> Find(const std::string &id) {
    std::shared_lock lock(sessions_mutex);
    const auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  HttpResponse Create(const std::string &body) {
    const auto j = nlohmann::json::parse(body);
    if (!j.is_object()) throw InvalidArgument("request body must be an object");
    const std::string output = j.value("output", "");
    if (output.empty()) throw InvalidArgument("missing output path");
    Stream bam, fr, en;
    try {
      bam = StreamFrom(j, "bam");
      fr = StreamFrom(j, "fr");
      en = StreamFrom(j, "en");
    } catch (const IoError &e) {
      throw InvalidArgument(e.what());
    }
    std::string id;
    {
      std::unique_lock lock(sessions_mutex);
      id = "s" + std::to_string(next_id++);
    }
    SessionOptions so;
    if (!options.journal_dir.empty()) {
      std::filesystem::create_directories(options.journal_dir);
      so.journal_path = (std::filesystem::path(options.journal_dir) / (id + ".jsonl")).string();
      nlohmann::json create = j;
      create["op"] = "create";
      std::ofstream os(so.journal_path, std::ios::binary | std::ios::trunc);
      os << create.dump() << '\n';
    }
    auto entry = std::make_shared<Entry>();
    entry->session = std::make_unique<Session>(std::move(bam), std::move(fr),
                                               std::move(en), output, so);
    Json state = State(id, *entry->session);
    {
      std::unique_lock lock(sessions_mutex);
      sessions[id] = entry;
    }
    return Reply(201, state);
  }

  HttpResponse Dispatch(const std::string &method, const std::string &path,
                        const std::string &body) {
    static const std::regex kSession(R"(/sessions/([A-Za-z0-9_-]+)(/([a-z-]+))?/?)");
    try {
      if (path == "/sessions" || path == "/sessions/") {
        if (method == "POST") return Create(body);
        if (method == "GET") {
          std::shared_lock lock(sessions_mutex);
          Json ids = Json::array();
          for (const auto &[id, e] : sessions) ids.push_back(id);
          return Reply(200, Json{{"sessions", ids}});
        }
        return Fail(405, "method not allowed");
      }
      std::smatch m;
      if (!std::regex_match(path, m, kSession)) return Fail(404, "no route for " + path);
      const std::string id = m[1].str();
      const std::string action = m[3].matched ? m[3].str() : "";
      const auto entry = Find(id);
      if (!entry) return Fail(404, "unknown session " + id);
      Session &s = *entry->session;

      if (method == "GET") {
        std::shared_lock lock(entry->mutex);
        if (action.empty()) return Reply(200, State(id, s));
        if (action == "export") {
          const auto pairs = ExportPairs(s.aligned());
          auto list = [](const data::ParallelCorpus &c) {
            Json out = Json::array();
            for (const auto &p : c.pairs) out.push_back({p.source, p.target});
            return out;
          };
          std::map<std::string, std::size_t> counts = {{"BFE", 0}, {"BF", 0}, {"BE", 0}};
          for (const auto &u : s.aligned()) ++counts[std::string(KindName(u.kind))];
          Json units = Json::array();
          for (const auto &u : s.aligned()) units.push_back(UnitJson(u));
          return Reply(200, Json{{"id", id},
                                 {"version", s.version()},
                                 {"counts", counts},
                                 {"bam_fr", list(pairs.bam_fr)},
                                 {"bam_en", list(pairs.bam_en)},
                                 {"units", units}});
        }
        return Fail(404, "no route for GET " + path);
      }
      if (method != "POST") return Fail(405, "method not allowed");
      std::unique_lock lock(entry->mutex);

      const nlohmann::json j =
          body.empty() ? nlohmann::json::object() : nlohmann::json::parse(body);
      if (!j.is_object()) throw InvalidArgument("request body must be an object");
      if (j.contains("version") && j.at("version").get<std::uint64_t>() != s.version()) {
        return Reply(409, Json{{"error", "version conflict"}, {"version", s.version()}});
      }
      Json extra;
      if (action == "advance") {
        const std::string lang = j.at("language").get<std::string>();
        std::optional<LanguageTag> tag;
        if (lang != "all") tag = LanguageFromCode(lang);
        s.Advance(tag, ParseStep(j.value("direction", "next")));
      } else if (action == "align") {
        extra = UnitJson(s.Align(ParseKind(j.at("kind").get<std::string>())));
      } else if (action == "save") {
        s.Save(j.value("overwrite", false));
      } else if (action == "continue-save") {
        s.ContinueSave();
      } else {
        return Fail(404, "no route for POST " + path);
      }
      Json state = State(id, s);
      if (!extra.is_null()) state["unit"] = extra;
      return Reply(200, state);
    } catch (const PreconditionError &e) {
      return Fail(422, e.what());
    } catch (const IoError &e) {
      return Fail(500, e.what());
    } catch (const Error &e) {
      return Fail(400, e.what());
    } catch (const nlohmann::json::exception &e) {
      return Fail(400, std::string("malformed request: ") + e.what());
    }
  }
};

AlignServer::AlignServer(ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                   {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                   {"Access-Control-Allow-Headers", "Content-Type"}});
  auto handler = [this](const httplib::Request &req, httplib::Response &res) {
    const HttpResponse r = impl_->Dispatch(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl_->http.Get(".*", handler);
  impl_->http.Post(".*", handler);
  impl_->http.Options(".*", [](const httplib::Request &, httplib::Response &res) {
    res.status = 204;
  });
}

AlignServer::~AlignServer() { Stop(); }

HttpResponse AlignServer::Handle(const std::string &method, const std::string &path,
                                 const std::string &body) {
  return impl_->Dispatch(method, path, body);
}

int AlignServer::Bind(const std::string &host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool AlignServer::Serve() { return impl_->http.listen_after_bind(); }

void AlignServer::Stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace bamt::align
