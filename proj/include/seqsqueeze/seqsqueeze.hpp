#pragma once

#include "seqsqueeze/baselines.hpp"
#include "seqsqueeze/compress.hpp"
#include "seqsqueeze/core.hpp"
#include "seqsqueeze/merge.hpp"
#include "seqsqueeze/npy.hpp"
#include "seqsqueeze/provenance_io.hpp"
#include "seqsqueeze/similarity.hpp"
