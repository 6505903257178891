#pragma once

#include "astkit/corpus.hpp"
#include "astkit/corpus_io.hpp"
#include "astkit/error.hpp"
#include "astkit/features.hpp"
#include "astkit/io.hpp"
#include "astkit/metrics.hpp"
#include "astkit/parallel.hpp"
#include "astkit/resegmenter.hpp"
#include "astkit/segmenter.hpp"
#include "astkit/subword.hpp"
#include "astkit/timecodes.hpp"
#include "astkit/utf8.hpp"
#include "astkit/wav.hpp"
