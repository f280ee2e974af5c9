#pragma once

// Umbrella header for the library. The command line lives in dalog/cli.hpp.

#include "dalog/completion.hpp"
#include "dalog/constraint.hpp"
#include "dalog/core.hpp"
#include "dalog/error.hpp"
#include "dalog/expander.hpp"
#include "dalog/formula.hpp"
#include "dalog/founded.hpp"
#include "dalog/grounder.hpp"
#include "dalog/parser.hpp"
#include "dalog/printer.hpp"
