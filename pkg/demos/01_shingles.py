# coding: utf-8

# # Shingles and resemblance
#
# Two documents are near-duplicates when their sets of 5-word shingles overlap
# enough. Resemblance is the Jaccard ratio of the two sets.

# In[1]:

from privfilter.shingles import NearDupIndex, resemblance, shingle_set, tokenize

tokenize("Dear Mr. Doe, see file1_2 attached.")


# Tokens are lowercased runs of letters and digits. The underscore splits, so
# `file1_2` gives two tokens.

# In[2]:

words = [f"w{i}" for i in range(200)]
len(shingle_set(words))


# 200 distinct words give 196 shingles. Drop five words from the middle and
# the edit touches 9 shingles of the original, leaving 187 in common out of 200.

# In[3]:

trimmed = words[:90] + words[95:]
a, b = shingle_set(words), shingle_set(trimmed)
print(len(a & b), len(a | b), resemblance(a, b))


# That is why a 5-word deletion from a 200-word document still clears the
# default 0.9 threshold.

# In[4]:

index = NearDupIndex.from_texts({
    "original": " ".join(words),
    "trimmed": " ".join(trimmed),
    "unrelated": " ".join(f"x{i}" for i in range(200)),
    "too short": "four words only here",
})
print(sorted(index.query_near("original", 0.9)))
print(sorted(index.query_near("original", 0.95)))
print("too short" in index)


# Items with fewer tokens than the window have no shingles and take part only
# in MD5 and family relations.
