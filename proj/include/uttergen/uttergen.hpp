#pragma once

#include "uttergen/backends.hpp"
#include "uttergen/config.hpp"
#include "uttergen/core.hpp"
#include "uttergen/evaluate.hpp"
#include "uttergen/generate.hpp"
#include "uttergen/io.hpp"
#include "uttergen/lexicon.hpp"
#include "uttergen/pipeline.hpp"
#include "uttergen/remote.hpp"
#include "uttergen/select.hpp"
#include "uttergen/summarize.hpp"
#include "uttergen/text.hpp"
