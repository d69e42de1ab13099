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

#ifndef BAMT_ALIGN_SERVER_H_
#define BAMT_ALIGN_SERVER_H_

#include <memory>
#include <string>

namespace bamt::align {

struct ServerOptions {
  // Directory for per-session JSONL journals; empty disables journaling.
  std::string journal_dir;
  // Stream items returned on each side of the cursors by GET /sessions/{id}.
  int window = 2;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

// JSON API over alignment sessions:
//   POST /sessions                    {"bam","fr","en": path or list of
//                                      texts, "output": path}
//   GET  /sessions/{id}               state, streams windowed around cursors
//   POST /sessions/{id}/advance       {"language": bam|fr|en|all,
//                                      "direction": next|prev}
//   POST /sessions/{id}/align         {"kind": BFE|BF|BE}
//   POST /sessions/{id}/save          {"overwrite": bool}
//   POST /sessions/{id}/continue-save {}
//   GET  /sessions/{id}/export        bam-fr and bam-en pair lists
// Mutations accept an optional "version"; a stale one is answered with 409.
// Precondition failures give 422, malformed requests 400, unknown sessions
// 404 and I/O failures 500. Every response allows any origin (CORS).
class AlignServer {
 public:
  explicit AlignServer(ServerOptions options = {});
  ~AlignServer();
  AlignServer(const AlignServer &) = delete;
  AlignServer &operator=(const AlignServer &) = delete;

  // Same routing without a socket.
  HttpResponse Handle(const std::string &method, const std::string &path,
                      const std::string &body = "");

  // Returns the bound port (0 picks a free one).
  int Bind(const std::string &host, int port = 0);
  // Blocks until Stop().
  bool Serve();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bamt::align

#endif  // BAMT_ALIGN_SERVER_H_
