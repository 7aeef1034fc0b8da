//! Commands write into a private staging directory. Success moves every
//! file into the output directory; failure moves the whole staging tree to
//! `quarantine/<command>/` so earlier results are never overwritten.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub struct Stage {
    root: PathBuf,
    dir: PathBuf,
    command: String,
    log: Vec<String>,
}

impl Stage {
    pub fn new(root: &Path, command: &str) -> Result<Self> {
        let dir = root.join(".staging").join(command);
        if dir.exists() {
            fs::remove_dir_all(&dir).with_context(|| format!("clearing {}", dir.display()))?;
        }
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { root: root.into(), dir, command: command.into(), log: Vec::new() })
    }

    /// Staged location for `rel`, with parent directories created.
    pub fn path(&self, rel: impl AsRef<Path>) -> Result<PathBuf> {
        let p = self.dir.join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        Ok(p)
    }

    pub fn write(&self, rel: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> Result<()> {
        let p = self.path(rel)?;
        fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))
    }

    /// Appends a line to the command's run log.
    pub fn log(&mut self, line: impl Into<String>) {
        let line = line.into();
        log::info!("{line}");
        self.log.push(line);
    }

    fn flush_log(&self) -> Result<()> {
        let mut text = self.log.join("\n");
        text.push('\n');
        self.write(format!("logs/{}.log", self.command), text)
    }

    pub fn commit(self) -> Result<()> {
        self.flush_log()?;
        let mut files = Vec::new();
        collect_files(&self.dir, &mut files)?;
        files.sort();
        for f in files {
            let rel = f.strip_prefix(&self.dir).expect("staged file under staging dir");
            let dest = self.root.join(rel);
            if let Some(parent) = dest.parent() {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::rename(&f, &dest).with_context(|| format!("moving {} to {}", f.display(), dest.display()))?;
        }
        self.cleanup()
    }

    /// Moves staged outputs to `quarantine/<command>/` and records `err`.
    pub fn quarantine(self, err: &anyhow::Error) -> Result<PathBuf> {
        self.flush_log()?;
        self.write("error.txt", format!("{err:#}\n"))?;
        let target = self.root.join("quarantine").join(&self.command);
        if target.exists() {
            fs::remove_dir_all(&target).with_context(|| format!("clearing {}", target.display()))?;
        }
        fs::create_dir_all(target.parent().unwrap())?;
        fs::rename(&self.dir, &target).with_context(|| format!("moving staging to {}", target.display()))?;
        self.cleanup()?;
        Ok(target)
    }

    fn cleanup(&self) -> Result<()> {
        if self.dir.exists() {
            fs::remove_dir_all(&self.dir)?;
        }
        let parent = self.root.join(".staging");
        if parent.exists() && fs::read_dir(&parent)?.next().is_none() {
            fs::remove_dir(&parent)?;
        }
        Ok(())
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}
