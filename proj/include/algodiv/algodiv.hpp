#pragma once

// Umbrella header: the whole toolkit.

#include "algodiv/chat.hpp"
#include "algodiv/cluster.hpp"
#include "algodiv/core.hpp"
#include "algodiv/exec.hpp"
#include "algodiv/genclient.hpp"
#include "algodiv/hash.hpp"
#include "algodiv/ingest.hpp"
#include "algodiv/jsonl.hpp"
#include "algodiv/judge.hpp"
#include "algodiv/metrics.hpp"
#include "algodiv/rng.hpp"
#include "algodiv/selfcheck.hpp"
#include "algodiv/synth.hpp"
