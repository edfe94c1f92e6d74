#pragma once

#include <csignal>

#include "voicesearch/net/http.hpp"

namespace voicesearch::tools {

// Blocks SIGINT/SIGTERM in every thread started after this call so the
// main thread can collect them with wait_for_shutdown().
inline sigset_t block_shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

inline void wait_for_shutdown(const sigset_t& set, net::HttpService& service) {
  int sig = 0;
  sigwait(&set, &sig);
  service.stop();
}

}  // namespace voicesearch::tools
