#pragma once

// Umbrella header.

#include "bqldb/bql/executor.hpp"
#include "bqldb/bql/parser.hpp"
#include "bqldb/cli/render.hpp"
#include "bqldb/cli/repl.hpp"
#include "bqldb/cli/session.hpp"
#include "bqldb/core/csv.hpp"
#include "bqldb/core/guess.hpp"
#include "bqldb/crosscat/density.hpp"
#include "bqldb/crosscat/ensemble.hpp"
#include "bqldb/crosscat/estimands.hpp"
#include "bqldb/crosscat/gibbs.hpp"
#include "bqldb/crosscat/query.hpp"
#include "bqldb/crosscat/serialize.hpp"
#include "bqldb/foreign/kepler.hpp"
#include "bqldb/foreign/registry.hpp"
#include "bqldb/foreign/sir.hpp"
#include "bqldb/gpm/ensemble.hpp"
