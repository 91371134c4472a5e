""" Collection of regular expressions. """

import re

# regular expressions for experiment configurations
AUTO_BLOCKS_REGEX = re.compile(r'^\s*auto\(\s*(.+?)\s*\)\s*$')

# regular expressions for command line values
VALUE_SEPARATOR_REGEX = re.compile(r'\s*[,;]\s*')
