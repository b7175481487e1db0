#pragma once

#include <memory>
#include <string>

#include "pairit/service/experiment.hpp"

namespace pairit::service {

// HTTP and WebSocket front end for an Experiment.
//
//   GET  /health                 {"status": "ok", ...}
//   POST /join                   body per Experiment::join -> {"participantId", "status"}
//   GET  /sessions/{id}/log      the session's event log as JSON Lines
//   GET  /ws?participant={id}    WebSocket upgrade; frames per Experiment
//
// Everything runs on one I/O thread, which also steps the experiment on a
// short timer.
class Server {
 public:
  // Binds immediately. Port 0 picks a free port. Throws BindFailure.
  Server(Experiment& experiment, const std::string& host, unsigned short port);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;

  // Serves until stop(). With handleSignals, SIGINT and SIGTERM shut the
  // experiment down (flushing every session log) and then stop the server.
  void run(bool handleSignals = false);

  // Safe from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pairit::service
