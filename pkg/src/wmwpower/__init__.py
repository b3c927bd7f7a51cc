"""Power of the Wilcoxon Mann-Whitney rank-sum test."""
